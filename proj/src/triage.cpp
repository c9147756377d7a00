#include "edr/triage.hpp"

#include <limits>
#include <random>

#include "edr/error.hpp"

namespace edr::triage {

using kernels::squared_distance;
using kernels::Vec4;

namespace {

// Unbiased draw from [0, n) by rejection; independent of the standard
// library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

double label_key(const Vec4& u) { return u[0] + u[3]; }

std::array<Vec4, 2> cluster_means(std::span<const Vec4> points, std::span<const int> labels,
                                  const std::array<Vec4, 2>& fallback) {
  std::array<Vec4, 2> sum{};
  std::array<std::size_t, 2> count{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sum[labels[i]];
    for (std::size_t k = 0; k < 4; ++k) s[k] += points[i][k];
    ++count[labels[i]];
  }
  std::array<Vec4, 2> out = fallback;
  for (int c = 0; c < 2; ++c) {
    if (count[c] == 0) continue;
    for (std::size_t k = 0; k < 4; ++k) out[c][k] = sum[c][k] / static_cast<double>(count[c]);
  }
  return out;
}

double sse(std::span<const Vec4> points, std::span<const int> labels, const std::array<Vec4, 2>& centers) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centers[labels[i]]);
  return s;
}

}  // namespace

std::array<PatchClass, 2> assign_cluster_labels(const std::array<Vec4, 2>& barycenters) {
  if (label_key(barycenters[1]) < label_key(barycenters[0])) return {PatchClass::Ctp, PatchClass::Stp};
  return {PatchClass::Stp, PatchClass::Ctp};
}

TriageResult classify_patches(std::span<const Vec4> features, std::uint64_t seed, const TriageParams& params) {
  if (features.empty()) throw ConfigError("triage needs at least one feature vector");
  if (params.max_iter < 1) throw ConfigError("max_iter must be >= 1");

  TriageResult result;
  result.seed = seed;
  const std::size_t n = features.size();

  std::vector<std::size_t> distinct_from_first;
  for (std::size_t i = 1; i < n; ++i)
    if (features[i] != features[0]) distinct_from_first.push_back(i);
  if (distinct_from_first.empty()) {
    result.stp_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.stp_ids[i] = i;
    result.barycenters = {features[0], features[0]};
    result.converged = true;
    result.sse_trace = {0.0};
    return result;
  }

  std::mt19937_64 rng(seed);
  const std::size_t first = uniform_index(rng, n);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i)
    if (features[i] != features[first]) others.push_back(i);
  const std::size_t second = others[uniform_index(rng, others.size())];

  std::array<Vec4, 2> centers{features[first], features[second]};
  std::vector<int> labels(n, 0);
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    kernels::parallel::assign_nearest(features, centers, labels);
    result.sse_trace.push_back(sse(features, labels, centers));
    result.iterations = iter;

    std::array<std::size_t, 2> count{};
    for (int l : labels) ++count[l];
    for (int c = 0; c < 2; ++c) {
      if (count[c] != 0) continue;
      // Re-seed an emptied cluster with the point farthest from the survivor.
      const Vec4& survivor = centers[1 - c];
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(features[i], survivor);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      labels[far] = c;
      centers[c] = features[far];
    }

    const auto updated = cluster_means(features, labels, centers);
    if (updated == centers) {
      result.converged = true;
      break;
    }
    centers = updated;
  }

  const auto mapping = assign_cluster_labels(centers);
  const int stp_cluster = mapping[0] == PatchClass::Stp ? 0 : 1;
  result.barycenters = {centers[stp_cluster], centers[1 - stp_cluster]};
  for (std::size_t i = 0; i < n; ++i) {
    if (squared_distance(features[i], result.barycenters[0]) <= squared_distance(features[i], result.barycenters[1]))
      result.stp_ids.push_back(i);
    else
      result.ctp_ids.push_back(i);
  }
  return result;
}

TriageResult all_ctp(std::size_t count) {
  TriageResult r;
  r.ctp_ids.resize(count);
  for (std::size_t i = 0; i < count; ++i) r.ctp_ids[i] = i;
  r.converged = true;
  return r;
}

}  // namespace edr::triage
