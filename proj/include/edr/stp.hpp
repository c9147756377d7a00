#pragma once

#include "edr/filters.hpp"
#include "edr/image.hpp"

namespace edr::stp {

struct StpParams {
  double sigma_spatial = 3.0;
  double sigma_range = 30.0;
  double stretch_lo = 1.0;   // percentile
  double stretch_hi = 99.0;  // percentile
  double log_sigma = 1.0;
  double sharpen_amount = 0.8;
  int scale = 4;
  filters::EdgeDirectedParams upscale{};

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

enum class Step { Denoise, Stretch, Sharpen, Upscale };

/// Nearest-rank percentile of the intensity histogram; q in [0, 100].
int percentile(const GrayImage& img, double q);

/// Linear map of [P_lo, P_hi] onto [0, 255] with clamping. Images whose two
/// percentiles coincide are returned unchanged.
GrayImage contrast_stretch(const GrayImage& img, double lo, double hi);

GrayImage stp_step(const GrayImage& patch, Step step, const StpParams& params = {});

/// Denoise -> Stretch -> Sharpen -> Upscale; output is (r*w) x (r*h).
GrayImage restore_stp(const GrayImage& patch, const StpParams& params = {});

}  // namespace edr::stp
