#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "edr/kernels.hpp"

namespace edr::triage {

enum class PatchClass { Stp, Ctp };

struct TriageParams {
  int max_iter = 100;
};

struct TriageResult {
  std::vector<std::size_t> stp_ids;  // ascending
  std::vector<std::size_t> ctp_ids;  // ascending
  std::array<kernels::Vec4, 2> barycenters{};  // [0] = STP, [1] = CTP
  int iterations = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  // Within-cluster sum of squared distances after each assignment step.
  std::vector<double> sse_trace;

  bool operator==(const TriageResult&) const = default;
};

/// Label mapping for two barycenters: the one with the smaller
/// weighted dissimilarity + weighted entropy is STP; ties go to index 0.
std::array<PatchClass, 2> assign_cluster_labels(const std::array<kernels::Vec4, 2>& barycenters);

/// Two-means clustering of weighted GLCM vectors into simple/complex sets.
/// Fewer than two distinct vectors yields everything STP.
TriageResult classify_patches(std::span<const kernels::Vec4> features, std::uint64_t seed,
                              const TriageParams& params = {});

/// Every patch CTP: the "direct" baseline that sends all patches to the restorer.
TriageResult all_ctp(std::size_t count);

}  // namespace edr::triage
