#include "edr/stp.hpp"

#include <array>
#include <cmath>

#include "edr/error.hpp"

namespace edr::stp {

void StpParams::validate() const {
  if (!(sigma_spatial > 0) || !(sigma_range > 0) || !(log_sigma > 0)) {
    throw ConfigError("STP sigmas must be positive");
  }
  if (!(stretch_lo >= 0) || !(stretch_lo < stretch_hi) || !(stretch_hi <= 100)) {
    throw ConfigError("stretch percentiles must satisfy 0 <= lo < hi <= 100");
  }
  if (!(sharpen_amount >= 0)) throw ConfigError("sharpen amount must be non-negative");
  if (scale < 1) throw ConfigError("scale must be >= 1");
}

int percentile(const GrayImage& img, double q) {
  if (img.empty()) throw DimensionError("empty image");
  if (!(q >= 0) || q > 100) throw ConfigError("percentile must lie in [0, 100]");
  std::array<std::size_t, 256> hist{};
  for (std::uint8_t v : img.pixels()) ++hist[v];
  const double n = static_cast<double>(img.size());
  const auto rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q / 100.0 * n)));
  std::size_t seen = 0;
  for (int v = 0; v < 256; ++v) {
    seen += hist[v];
    if (seen >= rank) return v;
  }
  return 255;
}

GrayImage contrast_stretch(const GrayImage& img, double lo, double hi) {
  const int p_lo = percentile(img, lo);
  const int p_hi = percentile(img, hi);
  if (p_hi <= p_lo) return img;
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = saturate_u8(255.0 * (v - p_lo) / (p_hi - p_lo));
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

GrayImage stp_step(const GrayImage& patch, Step step, const StpParams& params) {
  params.validate();
  switch (step) {
    case Step::Denoise:
      return filters::bilateral(patch, params.sigma_spatial, params.sigma_range);
    case Step::Stretch:
      return contrast_stretch(patch, params.stretch_lo, params.stretch_hi);
    case Step::Sharpen:
      return filters::sharpen_log(patch, params.log_sigma, params.sharpen_amount);
    case Step::Upscale:
      return filters::upscale_edge_directed(patch, params.scale, params.upscale);
  }
  throw ConfigError("unknown STP step");
}

GrayImage restore_stp(const GrayImage& patch, const StpParams& params) {
  GrayImage img = stp_step(patch, Step::Denoise, params);
  img = stp_step(img, Step::Stretch, params);
  img = stp_step(img, Step::Sharpen, params);
  return stp_step(img, Step::Upscale, params);
}

}  // namespace edr::stp
