#pragma once

#include <map>
#include <string>
#include <vector>

#include "edr/detection.hpp"
#include "edr/image.hpp"

namespace edr::eval {

struct Tally {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  bool operator==(const Tally&) const = default;
};

struct MatchedPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0.0;
  bool operator==(const MatchedPair&) const = default;
};

struct MatchResult {
  std::map<std::string, Tally> per_class;
  std::vector<MatchedPair> pairs;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision/recall with an empty denominator are 0.
Scores scores_from(const Tally& t);

struct ScoreTable {
  std::map<std::string, Scores> per_class;
  Scores macro;  // unweighted mean over classes
  Scores micro;  // from summed tallies
};

/// Greedy one-to-one matching within each class: repeatedly take the
/// remaining (gt, pred) pair with the largest IoU >= threshold; ties prefer
/// the higher-scored prediction, then the lower prediction index, then the
/// lower ground-truth index.
std::pair<MatchResult, ScoreTable> match_and_score(const std::vector<Detection>& preds,
                                                   const std::vector<Detection>& gts,
                                                   double iou_thresh = 0.9);

struct ImageMetrics {
  double ssim = 0.0;
  double grad_l1 = 0.0;
  double content_l1 = 0.0;
};

/// Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// L = 255, averaged over the windows that fit inside the image. Images
/// smaller than the window are reflect-padded and averaged over every pixel.
double ssim(const GrayImage& a, const GrayImage& b);

namespace serial {
double ssim(const GrayImage& a, const GrayImage& b);
}

/// Mean over pixels of |gx_a - gx_b| + |gy_a - gy_b| (central differences).
double gradient_l1(const GrayImage& a, const GrayImage& b);
double content_l1(const GrayImage& a, const GrayImage& b);

ImageMetrics image_metrics(const GrayImage& a, const GrayImage& b);

}  // namespace edr::eval
