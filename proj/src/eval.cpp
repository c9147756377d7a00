#include "edr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "edr/error.hpp"
#include "edr/filters.hpp"
#include "edr/kernels.hpp"

namespace edr::eval {

Scores scores_from(const Tally& t) {
  Scores s;
  s.precision = t.tp + t.fp > 0 ? static_cast<double>(t.tp) / (t.tp + t.fp) : 0.0;
  s.recall = t.tp + t.fn > 0 ? static_cast<double>(t.tp) / (t.tp + t.fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::pair<MatchResult, ScoreTable> match_and_score(const std::vector<Detection>& preds,
                                                   const std::vector<Detection>& gts, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) throw ConfigError("IoU threshold must lie in (0, 1]");
  std::set<std::string> classes;
  for (const auto& d : preds) classes.insert(d.class_label);
  for (const auto& d : gts) classes.insert(d.class_label);

  MatchResult match;
  std::vector<bool> pred_used(preds.size(), false), gt_used(gts.size(), false);
  for (const std::string& cls : classes) {
    std::vector<MatchedPair> candidates;
    int n_pred = 0, n_gt = 0;
    for (std::size_t p = 0; p < preds.size(); ++p) n_pred += preds[p].class_label == cls;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].class_label != cls) continue;
      ++n_gt;
      for (std::size_t p = 0; p < preds.size(); ++p) {
        if (preds[p].class_label != cls) continue;
        const double v = iou(preds[p].box, gts[g].box);
        if (v >= iou_thresh) candidates.push_back({p, g, v});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const MatchedPair& a, const MatchedPair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (preds[a.pred].score != preds[b.pred].score) return preds[a.pred].score > preds[b.pred].score;
      if (a.pred != b.pred) return a.pred < b.pred;
      return a.gt < b.gt;
    });
    int tp = 0;
    for (const MatchedPair& c : candidates) {
      if (pred_used[c.pred] || gt_used[c.gt]) continue;
      pred_used[c.pred] = gt_used[c.gt] = true;
      match.pairs.push_back(c);
      ++tp;
    }
    match.per_class[cls] = Tally{tp, n_pred - tp, n_gt - tp};
  }

  ScoreTable table;
  Tally total;
  for (const auto& [cls, t] : match.per_class) {
    const Scores s = scores_from(t);
    table.per_class[cls] = s;
    table.macro.precision += s.precision;
    table.macro.recall += s.recall;
    table.macro.f1 += s.f1;
    total.tp += t.tp;
    total.fp += t.fp;
    total.fn += t.fn;
  }
  if (!match.per_class.empty()) {
    const double k = static_cast<double>(match.per_class.size());
    table.macro.precision /= k;
    table.macro.recall /= k;
    table.macro.f1 /= k;
  }
  table.micro = scores_from(total);
  return {std::move(match), std::move(table)};
}

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

std::array<double, kWindow> gauss_1d() {
  std::array<double, kWindow> g{};
  double s = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kHalf;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    s += g[i];
  }
  for (double& v : g) v /= s;
  return g;
}

void check_pair(const GrayImage& a, const GrayImage& b) {
  if (a.empty() || b.empty()) throw DimensionError("empty image");
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError("image sizes differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                         " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

double ssim_formula(double mu_a, double mu_b, double aa, double bb, double ab) {
  const double va = aa - mu_a * mu_a, vb = bb - mu_b * mu_b, cov = ab - mu_a * mu_b;
  return ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) / ((mu_a * mu_a + mu_b * mu_b + kC1) * (va + vb + kC2));
}

// Direct windowed sums around one center, reflect-101 indices.
double ssim_at(const GrayImage& a, const GrayImage& b, int cx, int cy, const std::array<double, kWindow>& g) {
  double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
  for (int j = 0; j < kWindow; ++j) {
    const int y = kernels::reflect101(cy + j - kHalf, a.height());
    for (int i = 0; i < kWindow; ++i) {
      const int x = kernels::reflect101(cx + i - kHalf, a.width());
      const double w = g[i] * g[j];
      const double va = a.at(x, y), vb = b.at(x, y);
      mu_a += w * va;
      mu_b += w * vb;
      aa += w * va * va;
      bb += w * vb * vb;
      ab += w * va * vb;
    }
  }
  return ssim_formula(mu_a, mu_b, aa, bb, ab);
}

double ssim_small(const GrayImage& a, const GrayImage& b) {
  const auto g = gauss_1d();
  double acc = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) acc += ssim_at(a, b, x, y, g);
  return acc / static_cast<double>(a.size());
}

}  // namespace

namespace serial {
double ssim(const GrayImage& a, const GrayImage& b) {
  check_pair(a, b);
  if (a.width() < kWindow || a.height() < kWindow) return ssim_small(a, b);
  const auto g = gauss_1d();
  double acc = 0.0;
  for (int y = kHalf; y < a.height() - kHalf; ++y)
    for (int x = kHalf; x < a.width() - kHalf; ++x) acc += ssim_at(a, b, x, y, g);
  return acc / (static_cast<double>(a.width() - 2 * kHalf) * (a.height() - 2 * kHalf));
}
}  // namespace serial

double ssim(const GrayImage& a, const GrayImage& b) {
  check_pair(a, b);
  if (a.width() < kWindow || a.height() < kWindow) return ssim_small(a, b);
  const auto g = gauss_1d();
  const int w = a.width(), h = a.height();
  const int ow = w - 2 * kHalf, oh = h - 2 * kHalf;

  // Horizontal pass over every row for the five moment images.
  const auto plane = static_cast<std::size_t>(ow) * h;
  std::vector<double> hm(5 * plane);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto ra = a.row(y), rb = b.row(y);
    for (int x = 0; x < ow; ++x) {
      double m0 = 0, m1 = 0, m2 = 0, m3 = 0, m4 = 0;
      for (int i = 0; i < kWindow; ++i) {
        const double va = ra[x + i], vb = rb[x + i];
        m0 += g[i] * va;
        m1 += g[i] * vb;
        m2 += g[i] * va * va;
        m3 += g[i] * vb * vb;
        m4 += g[i] * va * vb;
      }
      const std::size_t k = static_cast<std::size_t>(y) * ow + x;
      hm[k] = m0;
      hm[plane + k] = m1;
      hm[2 * plane + k] = m2;
      hm[3 * plane + k] = m3;
      hm[4 * plane + k] = m4;
    }
  }
  std::vector<double> row_sum(static_cast<std::size_t>(oh), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    double acc = 0.0;
    for (int x = 0; x < ow; ++x) {
      double m[5] = {0, 0, 0, 0, 0};
      for (int j = 0; j < kWindow; ++j) {
        const std::size_t k = static_cast<std::size_t>(y + j) * ow + x;
        for (int q = 0; q < 5; ++q) m[q] += g[j] * hm[q * plane + k];
      }
      acc += ssim_formula(m[0], m[1], m[2], m[3], m[4]);
    }
    row_sum[y] = acc;
  }
  double total = 0.0;
  for (double s : row_sum) total += s;
  return total / (static_cast<double>(ow) * oh);
}

double gradient_l1(const GrayImage& a, const GrayImage& b) {
  check_pair(a, b);
  const auto ga = filters::central_gradient(a), gb = filters::central_gradient(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ga.gx.data.size(); ++i) {
    acc += std::abs(ga.gx.data[i] - gb.gx.data[i]) + std::abs(ga.gy.data[i] - gb.gy.data[i]);
  }
  return acc / static_cast<double>(a.size());
}

double content_l1(const GrayImage& a, const GrayImage& b) {
  check_pair(a, b);
  auto pa = a.pixels(), pb = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) acc += std::abs(static_cast<int>(pa[i]) - static_cast<int>(pb[i]));
  return acc / static_cast<double>(a.size());
}

ImageMetrics image_metrics(const GrayImage& a, const GrayImage& b) {
  return {ssim(a, b), gradient_l1(a, b), content_l1(a, b)};
}

}  // namespace edr::eval
