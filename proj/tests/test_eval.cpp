#include <doctest.h>

#include <cmath>
#include <random>

#include "edr/error.hpp"
#include "edr/eval.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace edr;
using namespace edr::eval;
using fixtures::gt;

namespace {

bool near_fraction(double v, scenarios::Fraction f) { return std::abs(v - f.value()) <= 1e-15; }

Box random_box(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(0, 40), len(1, 20);
  return {pos(rng), pos(rng), len(rng), len(rng)};
}

}  // namespace

TEST_CASE("iou") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 5, 5}) == 0.0);
  CHECK(iou(a, Box{10, 0, 10, 10}) == 0.0);
  CHECK(std::abs(iou(a, Box{5, 0, 10, 10}) - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("iou is symmetric and bounded") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 2000; ++k) {
    const Box a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(a, a) == 1.0);
  }
}

TEST_CASE("perfect predictions score 1 everywhere") {
  const std::vector<Detection> gts{gt("BKR", 0, 0, 10, 10), gt("DCR", 50, 50, 8, 8), gt("DCR", 5, 60, 8, 8)};
  const auto [m, t] = match_and_score(gts, gts);
  for (const auto& [cls, s] : t.per_class) {
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  CHECK(t.macro.f1 == 1.0);
  CHECK(t.micro.f1 == 1.0);
  CHECK(m.pairs.size() == 3);
}

TEST_CASE("one valid match out of two") {
  const std::vector<Detection> gts{gt("GEN", 0, 0, 10, 10), gt("GEN", 50, 50, 10, 10)};
  const std::vector<Detection> preds{gt("GEN", 0, 0, 10, 10), gt("GEN", 80, 80, 10, 10)};
  const auto [m, t] = match_and_score(preds, gts);
  CHECK(t.per_class.at("GEN").precision == 0.5);
  CHECK(t.per_class.at("GEN").recall == 0.5);
  CHECK(t.per_class.at("GEN").f1 == 0.5);
}

TEST_CASE("competing predictions: the largest IoU is selected") {
  const std::vector<Detection> gts{gt("TFM", 0, 0, 100, 100)};
  const std::vector<Detection> preds{gt("TFM", 0, 0, 92, 100, 0.99), gt("TFM", 0, 0, 100, 95, 0.5)};
  REQUIRE(iou(preds[0].box, gts[0].box) == doctest::Approx(0.92));
  REQUIRE(iou(preds[1].box, gts[0].box) == doctest::Approx(0.95));
  const auto [m, t] = match_and_score(preds, gts);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].pred == 1);
  CHECK(m.pairs[0].gt == 0);
  CHECK(m.per_class.at("TFM") == Tally{1, 1, 0});
}

TEST_CASE("equal IoU ties prefer the higher score, then the lower index") {
  const std::vector<Detection> gts{gt("IND", 0, 0, 10, 10)};
  const std::vector<Detection> preds{gt("IND", 0, 0, 10, 10, 0.4), gt("IND", 0, 0, 10, 10, 0.8),
                                     gt("IND", 0, 0, 10, 10, 0.8)};
  const auto [m, t] = match_and_score(preds, gts);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].pred == 1);
}

TEST_CASE("hand-computed three-class scenario") {
  const auto [m, t] = match_and_score(scenarios::hand_preds(), scenarios::hand_gts(), 0.9);
  for (const auto& e : scenarios::hand_expected()) {
    CAPTURE(e.cls);
    CHECK(m.per_class.at(e.cls) == Tally{e.tp, e.fp, e.fn});
    const Scores& s = t.per_class.at(e.cls);
    CHECK(near_fraction(s.precision, e.p));
    CHECK(near_fraction(s.recall, e.r));
    CHECK(near_fraction(s.f1, e.f1));
  }
  CHECK(near_fraction(t.macro.precision, scenarios::kMacroP));
  CHECK(near_fraction(t.macro.recall, scenarios::kMacroR));
  CHECK(near_fraction(t.macro.f1, scenarios::kMacroF1));
  CHECK(near_fraction(t.micro.precision, scenarios::kMicroP));
  CHECK(near_fraction(t.micro.recall, scenarios::kMicroR));
  CHECK(near_fraction(t.micro.f1, scenarios::kMicroF1));
}

TEST_CASE("empty inputs") {
  const auto [m, t] = match_and_score({}, {});
  CHECK(m.per_class.empty());
  CHECK(t.micro.f1 == 0.0);
  CHECK(scores_from(Tally{0, 0, 3}).precision == 0.0);
  CHECK(scores_from(Tally{0, 2, 0}).recall == 0.0);
}

TEST_CASE("tally invariants and threshold monotonicity on random scenarios") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> classes{"BKR", "DCR", "GND"};
  std::uniform_int_distribution<int> pick(0, 2), count(0, 12);
  std::uniform_real_distribution<double> score(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> gts, preds;
    for (int k = count(rng); k > 0; --k) {
      Detection d;
      d.class_label = classes[pick(rng)];
      d.box = random_box(rng);
      gts.push_back(d);
      if (score(rng) < 0.6) {
        Detection p = d;
        p.box.x += pick(rng) - 1;
        p.box.w += pick(rng);
        p.score = score(rng);
        preds.push_back(p);
      }
    }
    for (int k = count(rng) / 3; k > 0; --k) {
      Detection p;
      p.class_label = classes[pick(rng)];
      p.box = random_box(rng);
      p.score = score(rng);
      preds.push_back(p);
    }
    int previous_tp = 1 << 30;
    for (double thr : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const auto [m, t] = match_and_score(preds, gts, thr);
      int tp = 0;
      std::vector<int> pred_used(preds.size()), gt_used(gts.size());
      for (const auto& p : m.pairs) {
        CHECK(p.iou >= thr);
        CHECK(preds[p.pred].class_label == gts[p.gt].class_label);
        ++pred_used[p.pred];
        ++gt_used[p.gt];
      }
      for (int u : pred_used) CHECK(u <= 1);
      for (int u : gt_used) CHECK(u <= 1);
      for (const auto& cls : classes) {
        const long n_gt = std::count_if(gts.begin(), gts.end(), [&](auto& d) { return d.class_label == cls; });
        const long n_pred = std::count_if(preds.begin(), preds.end(), [&](auto& d) { return d.class_label == cls; });
        const Tally tl = m.per_class.count(cls) ? m.per_class.at(cls) : Tally{};
        CHECK(tl.tp + tl.fn == n_gt);
        CHECK(tl.tp + tl.fp == n_pred);
        tp += tl.tp;
        if (t.per_class.count(cls)) {
          const Scores& s = t.per_class.at(cls);
          if (s.precision + s.recall > 0) {
            CHECK(s.f1 == doctest::Approx(2 * s.precision * s.recall / (s.precision + s.recall)));
          } else {
            CHECK(s.f1 == 0.0);
          }
        }
      }
      CHECK(tp == static_cast<int>(m.pairs.size()));
      CHECK(tp <= previous_tp);
      previous_tp = tp;
    }
  }
}

TEST_CASE("image_metrics of identical images") {
  std::mt19937_64 rng(3);
  const GrayImage x = fixtures::random_image(40, 30, rng);
  const ImageMetrics m = image_metrics(x, x);
  CHECK(m.ssim == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.grad_l1 == 0.0);
  CHECK(m.content_l1 == 0.0);
}

TEST_CASE("image_metrics of a two-valued image and its negative") {
  GrayImage x(24, 24, 255);
  for (int y = 0; y < 24; ++y)
    for (int k = 0; k < 24; ++k)
      if ((k / 3 + y / 4) % 2) x.at(k, y) = 0;
  GrayImage neg = x;
  for (auto& v : neg.pixels()) v = static_cast<std::uint8_t>(255 - v);
  const ImageMetrics m = image_metrics(x, neg);
  CHECK(m.content_l1 == 255.0);
  CHECK(m.ssim < 0.0);
}

TEST_CASE("gradient_l1 of a flat image against a single step edge") {
  GrayImage step(5, 5, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 2; x < 5; ++x) step.at(x, y) = 255;
  // Per row gx = 0, 127.5, 127.5, 0, 0 and gy = 0: mean = 5 * 255 / 25.
  CHECK(gradient_l1(GrayImage(5, 5, 0), step) == 51.0);
  auto [gx, gy] = oracle::gradient(step);
  double s = 0;
  for (std::size_t i = 0; i < gx.size(); ++i) s += std::abs(gx[i]) + std::abs(gy[i]);
  CHECK(s / 25 == 51.0);
}

TEST_CASE("metric properties on random pairs") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const int w = 5 + k * 3, h = 4 + k * 2;
    const GrayImage a = fixtures::random_image(w, h, rng), b = fixtures::random_image(w, h, rng);
    const double s = ssim(a, b);
    CHECK(s == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK(std::abs(s - serial::ssim(a, b)) < 1e-10);
    CHECK(content_l1(a, b) == content_l1(b, a));
    CHECK(content_l1(a, b) > 0.0);
    CHECK(gradient_l1(a, b) == gradient_l1(b, a));
    CHECK(gradient_l1(a, b) >= 0.0);
    // Gradient distance matches the oracle fields.
    auto [ax, ay] = oracle::gradient(a);
    auto [bx, by] = oracle::gradient(b);
    double g = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) g += std::abs(ax[i] - bx[i]) + std::abs(ay[i] - by[i]);
    CHECK(gradient_l1(a, b) == doctest::Approx(g / ax.size()).epsilon(1e-12));
  }
}

TEST_CASE("image_metrics rejects mismatched sizes") {
  CHECK_THROWS_AS(image_metrics(GrayImage(4, 4), GrayImage(4, 5)), DimensionError);
}
