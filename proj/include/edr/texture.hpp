#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "edr/image.hpp"
#include "edr/kernels.hpp"

namespace edr::texture {

/// Pixel displacement (dx, dy): pixel (x, y) is paired with (x + dx, y + dy).
struct Offset {
  int dx = 1;
  int dy = 0;
  bool operator==(const Offset&) const = default;
};

/// Distance-1 offsets in the four principal directions.
inline std::vector<Offset> default_offsets() { return {{1, 0}, {0, 1}, {1, 1}, {1, -1}}; }

/// Raw co-occurrence counts, row index = level of the reference pixel.
struct Glcm {
  int levels = 0;
  Offset offset;
  std::vector<std::uint64_t> counts;  // levels x levels

  std::uint64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * levels + j]; }
  std::uint64_t total() const;
};

struct NormalizedGlcm {
  int levels = 0;
  Offset offset;
  std::vector<double> p;  // levels x levels, sums to 1

  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

/// Quantized gray levels, row-major, each in [0, levels).
struct LevelMap {
  int width = 0;
  int height = 0;
  int levels = 0;
  std::vector<int> values;
};

/// floor(v * levels / 256).
LevelMap quantize(const GrayImage& img, int levels);

/// Directional co-occurrence counts; no symmetric accumulation.
Glcm compute_glcm(const LevelMap& levels, Offset offset);
Glcm compute_glcm(const GrayImage& patch, Offset offset, int levels);

NormalizedGlcm normalize_glcm(const Glcm& raw);

struct Measures {
  double dissimilarity = 0.0;
  double homogeneity = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
};

/// Dissimilarity, homogeneity, energy and entropy (0 ln 0 = 0) of one matrix.
Measures measures(const NormalizedGlcm& p);

using Weights = std::array<double, 4>;
inline constexpr Weights kDefaultWeights{0.3, 0.1, 0.2, 0.4};

struct TextureParams {
  int levels = 16;
  std::vector<Offset> offsets = default_offsets();
  Weights weights = kDefaultWeights;
};

struct GlcmFeatures {
  Measures raw;  // averaged over offsets
  Weights weights = kDefaultWeights;
  kernels::Vec4 weighted{};  // (a1 Md, a2 Mh, a3 Me, a4 Mp)
};

GlcmFeatures glcm_features(const GrayImage& patch, const TextureParams& params = {});

namespace serial {
std::vector<GlcmFeatures> batch_features(std::span<const GrayImage> patches, const TextureParams& params);
}
namespace parallel {
std::vector<GlcmFeatures> batch_features(std::span<const GrayImage> patches, const TextureParams& params);
}

}  // namespace edr::texture
