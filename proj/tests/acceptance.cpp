// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edr/degrade.hpp"
#include "edr/eval.hpp"
#include "edr/export.hpp"
#include "edr/filters.hpp"
#include "edr/io.hpp"
#include "edr/parallel.hpp"
#include "edr/pipeline.hpp"
#include "edr/raster.hpp"
#include "edr/stp.hpp"
#include "edr/texture.hpp"
#include "edr/triage.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace edr;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kMeasureTol = 1e-9;
constexpr double kAnalyticTol = 1e-9;
constexpr double kIouTol = 1e-12;
constexpr double kFractionTol = 1e-12;
constexpr double kMaxInvocationRatio = 0.60;
constexpr double kMaxWallRatio = 0.85;
constexpr int kSleepMsPerPatch = 10;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = "failed: " + what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Raw counts against pixel-pair enumeration, measures against direct sums.
Outcome glcm_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  const int levels_cycle[] = {2, 8, 16};
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int w = 2 + static_cast<int>(rng() % 31), h = 2 + static_cast<int>(rng() % 31);
    const int levels = levels_cycle[t % 3];
    const GrayImage patch = fixtures::random_image(w, h, rng);
    for (const texture::Offset off : texture::default_offsets()) {
      const auto brute = oracle::glcm(patch, off.dx, off.dy, levels);
      const texture::Glcm raw = texture::compute_glcm(patch, off, levels);
      bool same = true;
      for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) same = same && raw.at(i, j) == brute[i][j];
      o.require(same, "raw counts differ on patch " + std::to_string(t));
      const texture::Measures m = texture::measures(texture::normalize_glcm(raw));
      const oracle::Measures r = oracle::measures(oracle::normalize(brute));
      worst = std::max({worst, std::abs(m.dissimilarity - r.d), std::abs(m.homogeneity - r.h),
                        std::abs(m.energy - r.e), std::abs(m.entropy - r.p)});
    }
  }
  o.require(worst <= kMeasureTol, "measure deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "100 patches x 4 offsets, counts exact, max measure error " + fmt("%.2g", worst);
  return o;
}

// 2. Constant patch and the two-level diagonal matrix.
Outcome glcm_analytic() {
  Outcome o;
  for (int v : {0, 77, 255}) {
    const auto f = texture::glcm_features(GrayImage(12, 9, static_cast<std::uint8_t>(v)));
    o.require(f.raw.dissimilarity == 0 && f.raw.homogeneity == 1 && f.raw.energy == 1 && f.raw.entropy == 0,
              "constant patch measures");
  }
  texture::NormalizedGlcm diag{2, {1, 0}, {0.5, 0.0, 0.0, 0.5}};
  const texture::Measures m = texture::measures(diag);
  o.require(std::abs(m.dissimilarity) <= kAnalyticTol && std::abs(m.homogeneity - 1) <= kAnalyticTol &&
                std::abs(m.energy - 0.5) <= kAnalyticTol && std::abs(m.entropy - std::log(2.0)) <= kAnalyticTol,
            "diagonal matrix measures");
  // Horizontal stripes at two levels produce the same matrix along (1, 0).
  GrayImage stripes(8, 8, 0);
  for (int y = 4; y < 8; ++y) fixtures::hline(stripes, 0, 7, y, 255);
  const texture::Measures s = texture::measures(texture::normalize_glcm(texture::compute_glcm(stripes, {1, 0}, 2)));
  o.require(std::abs(s.entropy - std::log(2.0)) <= kAnalyticTol && std::abs(s.energy - 0.5) <= kAnalyticTol,
            "striped patch measures");
  if (o.pass) o.detail = "constant -> (0, 1, 1, 0); diagonal -> (0, 1, 0.5, ln 2 " + fmt("%+.1e", m.entropy - std::log(2.0)) + ")";
  return o;
}

// 3. Separated clusters, SSE monotonicity, thread-count independence.
Outcome triage_clusters() {
  Outcome o;
  const double spread = 0.02;  // per-coordinate half width: cluster radius <= 2 * spread
  const kernels::Vec4 ca{0.20, 0.50, 0.50, 0.20}, cb{0.38, 0.50, 0.50, 0.38};
  double center_gap = 0;
  for (int k = 0; k < 4; ++k) center_gap += (ca[k] - cb[k]) * (ca[k] - cb[k]);
  center_gap = std::sqrt(center_gap);
  o.require(center_gap >= 5 * (2 * spread), "fixture separation");
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    std::uniform_real_distribution<double> u(-spread, spread);
    const int na = 10 + static_cast<int>(seed % 30), nb = 5 + static_cast<int>(seed % 20);
    std::vector<kernels::Vec4> pts;
    for (int i = 0; i < na; ++i) pts.push_back({ca[0] + u(rng), ca[1] + u(rng), ca[2] + u(rng), ca[3] + u(rng)});
    for (int i = 0; i < nb; ++i) pts.push_back({cb[0] + u(rng), cb[1] + u(rng), cb[2] + u(rng), cb[3] + u(rng)});
    triage::TriageResult one, many;
    {
      ScopedJobs scope(1);
      one = triage::classify_patches(pts, seed);
    }
    {
      ScopedJobs scope(8);
      many = triage::classify_patches(pts, seed);
    }
    o.require(one == many, "jobs 1 vs 8 differ at seed " + std::to_string(seed));
    std::vector<std::size_t> stp, ctp;
    for (int i = 0; i < na; ++i) stp.push_back(i);
    for (int i = na; i < na + nb; ++i) ctp.push_back(i);
    exact += one.stp_ids == stp && one.ctp_ids == ctp;
    for (std::size_t k = 1; k < one.sse_trace.size(); ++k)
      o.require(one.sse_trace[k] <= one.sse_trace[k - 1], "SSE increased at seed " + std::to_string(seed));
  }
  o.require(exact == 100, std::to_string(exact) + "/100 exact partitions");
  if (o.pass) o.detail = "100/100 exact partitions, SSE non-increasing, jobs 1 == jobs 8";
  return o;
}

// 4. merge(slice(x)) == x.
Outcome slice_merge() {
  Outcome o;
  std::mt19937_64 rng(404);
  for (int t = 0; t < 50; ++t) {
    const int w = 1 + static_cast<int>(rng() % 400), h = 1 + static_cast<int>(rng() % 400);
    const int patch = 1 + static_cast<int>(rng() % std::min(w, h));
    const int overlap = static_cast<int>(rng() % patch);
    const GrayImage img = fixtures::random_image(w, h, rng);
    o.require(merge_patches(slice_patches(img, patch, overlap)) == img,
              fmt("round trip %gx%g w=%g p=%g", w, h, patch, overlap));
  }
  if (o.pass) o.detail = "50/50 random (size, w, p) round trips bit-exact";
  return o;
}

// 5. Same seed, same bytes; SSIM to the original falls with every added order.
Outcome degrade_monotone() {
  Outcome o;
  const GrayImage hq = fixtures::line_art(512, 512);
  const GrayImage reference = filters::downsample_area(hq, 4);
  degrade::DegradeConfig cfg;
  cfg.target_scale = 4;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto r1 = degrade::sample_recipe(seed, cfg), r2 = degrade::sample_recipe(seed, cfg);
    o.require(io::encode_png(degrade::degrade(hq, r1)) == io::encode_png(degrade::degrade(hq, r2)),
              "non-deterministic output");
  }
  std::vector<double> means;
  for (int order = 1; order <= 5; ++order) {
    cfg.fixed_orders = order;
    double sum = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const GrayImage lq = degrade::degrade(hq, degrade::sample_recipe(seed, cfg));
      o.require(lq.width() == reference.width() && lq.height() == reference.height(), "final scale not fixed");
      if (!o.pass) return o;
      sum += eval::ssim(reference, lq);
    }
    means.push_back(sum / 30);
  }
  std::string trend;
  for (std::size_t k = 0; k < means.size(); ++k) {
    trend += (k ? " > " : "") + fmt("%.3f", means[k]);
    if (k) o.require(means[k] < means[k - 1], "mean SSIM not decreasing: " + trend);
  }
  if (o.pass) o.detail = "deterministic; mean SSIM by order " + trend;
  return o;
}

// 6. Hand scenario, IoU 1/3, competing predictions.
Outcome evaluation_oracle() {
  Outcome o;
  auto near = [](double v, scenarios::Fraction f) { return std::abs(v - f.value()) <= kFractionTol; };
  const auto [m, t] = eval::match_and_score(scenarios::hand_preds(), scenarios::hand_gts(), 0.9);
  for (const auto& e : scenarios::hand_expected()) {
    const eval::Scores& s = t.per_class.at(e.cls);
    o.require(m.per_class.at(e.cls) == eval::Tally{e.tp, e.fp, e.fn}, std::string("tally ") + e.cls);
    o.require(near(s.precision, e.p) && near(s.recall, e.r) && near(s.f1, e.f1), std::string("scores ") + e.cls);
  }
  o.require(near(t.macro.precision, scenarios::kMacroP) && near(t.macro.recall, scenarios::kMacroR) &&
                near(t.macro.f1, scenarios::kMacroF1),
            "macro scores");
  o.require(near(t.micro.precision, scenarios::kMicroP) && near(t.micro.recall, scenarios::kMicroR) &&
                near(t.micro.f1, scenarios::kMicroF1),
            "micro scores");
  const double half = iou({0, 0, 10, 10}, {5, 0, 10, 10});
  o.require(std::abs(half - 1.0 / 3.0) <= kIouTol, "IoU of half-shifted boxes");
  const std::vector<Detection> gts{fixtures::gt("TFM", 0, 0, 100, 100)};
  const std::vector<Detection> preds{fixtures::gt("TFM", 0, 0, 92, 100, 0.99), fixtures::gt("TFM", 0, 0, 100, 95, 0.5)};
  const auto [cm, ct] = eval::match_and_score(preds, gts, 0.9);
  o.require(cm.pairs.size() == 1 && cm.pairs[0].pred == 1, "competing predictions");
  if (o.pass) o.detail = "P/R/F1 exact to 1e-12, macro F1 16/45, micro F1 2/5, IoU 1/3, largest IoU wins";
  return o;
}

// Unwired symbols near the corners and one in the middle: the central part
// still spans most of the sheet, and most patches stay blank.
GrayImage sparse_ed() {
  GrayImage ed(1000, 800, 255);
  for (const Box& b : {Box{20, 20, 40, 30}, Box{930, 30, 40, 40}, Box{25, 730, 40, 40}, Box{940, 740, 30, 30},
                       Box{480, 380, 40, 30}})
    fixtures::draw_symbol(ed, b);
  return ed;
}

// 7. Categorized triage against the everything-complex baseline.
Outcome triage_efficiency() {
  Outcome o;
  const GrayImage ed = sparse_ed();
  pipeline::PipelineConfig cfg;
  const pipeline::TriageOutcome tri = pipeline::triage_drawing(ed, cfg);
  int blank = 0;
  for (std::size_t i = 0; i < tri.grid.size(); ++i) {
    const auto px = tri.grid.patches[i].pixels();
    blank += std::all_of(px.begin(), px.end(), [&](std::uint8_t v) { return v == px[0]; });
  }
  const double blank_share = static_cast<double>(blank) / tri.grid.size();
  o.require(blank_share >= 0.5, fmt("blank share %.2f", blank_share));

  plugin::PluginSpec spec;
  spec.executable = EDR_STUB_PLUGIN;
  spec.extra_args = {"--mode", "bicubic", "--sleep-ms", std::to_string(kSleepMsPerPatch)};
  pipeline::PluginRestorer sleepy(spec);
  auto timed = [&](pipeline::TriageMode mode) {
    pipeline::PipelineConfig c = cfg;
    c.triage_mode = mode;
    const auto t0 = Clock::now();
    auto [img, report] = pipeline::restore_drawing(ed, c, sleepy);
    return std::pair{report, seconds_since(t0)};
  };
  timed(pipeline::TriageMode::Categorized);  // warm caches and the plug-in binary
  const auto [cat, cat_s] = timed(pipeline::TriageMode::Categorized);
  const auto [dir, dir_s] = timed(pipeline::TriageMode::Direct);
  const double inv_ratio = static_cast<double>(cat.restorer_invocations) / dir.restorer_invocations;
  const double wall_ratio = cat_s / dir_s;
  o.require(inv_ratio <= kMaxInvocationRatio, fmt("invocation ratio %.3f", inv_ratio));
  o.require(wall_ratio <= kMaxWallRatio, fmt("wall-clock ratio %.3f (%.2f s vs %.2f s)", wall_ratio, cat_s, dir_s));
  o.detail = fmt("blank %.0f%%, invocations %.0f%% of direct, wall-clock %.0f%% of direct", 100 * blank_share,
                 100 * inv_ratio, 100 * wall_ratio) +
             fmt(" (%.2f s vs %.2f s)", cat_s, dir_s) + (o.pass ? "" : "; " + o.detail);
  return o;
}

// 8. Identity restorer, oracle detector plug-in, XML round trip, thread independence.
Outcome end_to_end() {
  Outcome o;
  using fixtures::gt;
  const std::vector<Detection> symbols{gt("BKR", 30, 30, 30, 24), gt("DCR", 120, 40, 36, 36), gt("TFM", 200, 150, 40, 30),
                                       gt("GND", 60, 170, 24, 24), gt("CAP", 150, 110, 20, 28), gt("GEN", 240, 40, 36, 36),
                                       gt("IND", 110, 190, 30, 20), gt("GLD", 20, 110, 30, 20)};
  const GrayImage ed = fixtures::synthetic_ed(300, 240, symbols);
  pipeline::PipelineConfig cfg;
  const CropRect crop = extract_central_part(ed, cfg.central).rect;
  std::vector<Detection> truth;
  for (const auto& s : symbols)
    truth.push_back(gt(s.class_label, (s.box.x - crop.x) * cfg.scale, (s.box.y - crop.y) * cfg.scale,
                       s.box.w * cfg.scale, s.box.h * cfg.scale));
  const auto truth_file = std::filesystem::temp_directory_path() / "edr_acceptance_truth.json";
  io::write_text(truth_file, exchange::detections_to_json(truth));

  plugin::PluginSpec spec;
  spec.executable = EDR_STUB_PLUGIN;
  spec.kind = plugin::Kind::Detector;
  spec.extra_args = {"--mode", "oracle", "--truth", truth_file.string()};
  auto run = [&](int jobs) {
    ScopedJobs scope(jobs);
    auto restorer = pipeline::make_builtin_restorer("identity-bicubic");
    pipeline::PluginDetector detector(spec);
    const pipeline::PipelineReport r = pipeline::run_end_to_end(ed, cfg, *restorer, detector);
    const auto desc = exchange::describe("acceptance", r.restored.width(), r.restored.height(), r.scale, r.detections);
    return std::tuple{r, exchange::export_xml(desc), desc};
  };
  const auto [r1, xml1, desc1] = run(1);
  const auto [r4, xml4, desc4] = run(4);
  const auto [match, scores] = eval::match_and_score(r1.detections, truth, cfg.iou_thresh);
  o.require(scores.micro.f1 == 1.0 && scores.macro.f1 == 1.0, fmt("F1 %.4f", scores.micro.f1));
  o.require(exchange::parse_xml(xml1) == desc1, "XML round trip");
  o.require(r1.restored == r4.restored && r1.detections == r4.detections && xml1 == xml4, "jobs 1 vs 4 differ");
  if (o.pass)
    o.detail = std::to_string(truth.size()) + " symbols, F1 = 1.0, XML round-trips, jobs 1 == jobs 4";
  return o;
}

// 9. STP chain contract and sharpness against plain bicubic.
Outcome stp_chain() {
  Outcome o;
  std::mt19937_64 rng(909);
  for (int t = 0; t < 20; ++t) {
    stp::StpParams p;
    p.scale = 1 + static_cast<int>(rng() % 4);
    const GrayImage in = fixtures::random_image(1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40), rng);
    const GrayImage out = stp::restore_stp(in, p);
    o.require(out.width() == p.scale * in.width() && out.height() == p.scale * in.height(), "output size");
  }
  double worst = 1e9;
  for (int pitch : {6, 8, 12, 16, 24}) {
    const GrayImage art = fixtures::line_art(96, 96, pitch);
    const double chain = filters::mean_gradient_magnitude(stp::restore_stp(art));
    const double bicubic = filters::mean_gradient_magnitude(filters::upscale_bicubic(art, 4));
    o.require(chain >= bicubic, fmt("pitch %g: %.3f < %.3f", pitch, chain, bicubic));
    worst = std::min(worst, chain / bicubic);
  }
  if (o.pass) o.detail = "sizes r x input; gradient ratio to bicubic >= " + fmt("%.3f", worst);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "GLCM oracle equivalence", 10, glcm_oracle},
      {2, "GLCM analytic cases", 0, glcm_analytic},
      {3, "triage partition and determinism", 5, triage_clusters},
      {4, "slice/merge round trip", 5, slice_merge},
      {5, "degradation determinism and monotonicity", 60, degrade_monotone},
      {6, "evaluation oracle", 0, evaluation_oracle},
      {7, "triage efficiency", 60, triage_efficiency},
      {8, "end-to-end smoke", 30, end_to_end},
      {9, "STP chain", 0, stp_chain},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double s = seconds_since(t0);
    if (c.limit_s > 0 && s >= c.limit_s) {
      o.pass = false;
      o.detail += fmt("; runtime %.1f s over the %.0f s limit", s, c.limit_s);
    }
    failures += !o.pass;
    std::printf("[%s] %d. %s: %s (%.2f s%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                c.limit_s > 0 ? fmt(" < %.0f s", c.limit_s).c_str() : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
