#include "edr/texture.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "edr/error.hpp"

namespace edr::texture {

std::uint64_t Glcm::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

LevelMap quantize(const GrayImage& img, int levels) {
  if (levels < 2 || levels > 256) throw ConfigError("GLCM levels must lie in [2, 256], got " + std::to_string(levels));
  if (img.empty()) throw DimensionError("empty image");
  LevelMap map{img.width(), img.height(), levels, std::vector<int>(img.size())};
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) map.values[i] = px[i] * levels / 256;
  return map;
}

Glcm compute_glcm(const LevelMap& map, Offset offset) {
  if (map.levels < 2) throw ConfigError("GLCM levels must be >= 2");
  if (offset.dx == 0 && offset.dy == 0) throw ConfigError("GLCM offset (0, 0) is not a displacement");
  const int n = map.levels;
  Glcm g{n, offset, std::vector<std::uint64_t>(static_cast<std::size_t>(n) * n, 0)};
  // Reference pixels whose partner stays in bounds.
  const int x0 = std::max(0, -offset.dx), x1 = std::min(map.width, map.width - offset.dx);
  const int y0 = std::max(0, -offset.dy), y1 = std::min(map.height, map.height - offset.dy);
  std::uint64_t pairs = 0;
  for (int y = y0; y < y1; ++y) {
    const int* ref = map.values.data() + static_cast<std::size_t>(y) * map.width;
    const int* nbr = map.values.data() + static_cast<std::size_t>(y + offset.dy) * map.width + offset.dx;
    for (int x = x0; x < x1; ++x) {
      ++g.counts[static_cast<std::size_t>(ref[x]) * n + nbr[x]];
      ++pairs;
    }
  }
  if (pairs == 0) {
    throw EmptyGlcmError("no pixel pair at offset (" + std::to_string(offset.dx) + ", " + std::to_string(offset.dy) +
                         ") fits a " + std::to_string(map.width) + "x" + std::to_string(map.height) + " patch");
  }
  return g;
}

Glcm compute_glcm(const GrayImage& patch, Offset offset, int levels) {
  return compute_glcm(quantize(patch, levels), offset);
}

NormalizedGlcm normalize_glcm(const Glcm& raw) {
  const std::uint64_t total = raw.total();
  if (total == 0) throw EmptyGlcmError("cannot normalize an all-zero GLCM");
  NormalizedGlcm out{raw.levels, raw.offset, std::vector<double>(raw.counts.size())};
  const double inv = static_cast<double>(total);
  for (std::size_t i = 0; i < raw.counts.size(); ++i) out.p[i] = static_cast<double>(raw.counts[i]) / inv;
  return out;
}

Measures measures(const NormalizedGlcm& p) {
  Measures m;
  for (int i = 0; i < p.levels; ++i) {
    for (int j = 0; j < p.levels; ++j) {
      const double v = p.at(i, j);
      const double d = static_cast<double>(i - j);
      m.dissimilarity += std::abs(d) * v;
      m.homogeneity += v / (1.0 + d * d);
      m.energy += v * v;
      if (v > 0.0) m.entropy -= v * std::log(v);
    }
  }
  return m;
}

GlcmFeatures glcm_features(const GrayImage& patch, const TextureParams& params) {
  if (params.offsets.empty()) throw ConfigError("at least one GLCM offset is required");
  const LevelMap map = quantize(patch, params.levels);
  Measures sum;
  for (const Offset& off : params.offsets) {
    const Measures m = measures(normalize_glcm(compute_glcm(map, off)));
    sum.dissimilarity += m.dissimilarity;
    sum.homogeneity += m.homogeneity;
    sum.energy += m.energy;
    sum.entropy += m.entropy;
  }
  const double k = static_cast<double>(params.offsets.size());
  GlcmFeatures f;
  f.raw = {sum.dissimilarity / k, sum.homogeneity / k, sum.energy / k, sum.entropy / k};
  f.weights = params.weights;
  f.weighted = {params.weights[0] * f.raw.dissimilarity, params.weights[1] * f.raw.homogeneity,
                params.weights[2] * f.raw.energy, params.weights[3] * f.raw.entropy};
  return f;
}

namespace serial {
std::vector<GlcmFeatures> batch_features(std::span<const GrayImage> patches, const TextureParams& params) {
  std::vector<GlcmFeatures> out;
  out.reserve(patches.size());
  for (const GrayImage& p : patches) out.push_back(glcm_features(p, params));
  return out;
}
}  // namespace serial

namespace parallel {
std::vector<GlcmFeatures> batch_features(std::span<const GrayImage> patches, const TextureParams& params) {
  if (params.offsets.empty()) throw ConfigError("at least one GLCM offset is required");
  std::vector<GlcmFeatures> out(patches.size());
  const auto n = static_cast<std::ptrdiff_t>(patches.size());
  // Exceptions must not escape an OpenMP region; keep the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = glcm_features(patches[i], params);
    } catch (...) {
#pragma omp critical(edr_batch_features)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}
}  // namespace parallel

}  // namespace edr::texture
