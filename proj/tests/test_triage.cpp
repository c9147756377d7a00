#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "edr/kernels.hpp"
#include "edr/parallel.hpp"
#include "edr/triage.hpp"

using namespace edr;
using namespace edr::triage;
using kernels::Vec4;

namespace {

std::vector<Vec4> two_groups(std::mt19937_64& rng, int na, int nb, const Vec4& ca, const Vec4& cb, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Vec4> pts;
  for (int i = 0; i < na; ++i) pts.push_back({ca[0] + u(rng), ca[1] + u(rng), ca[2] + u(rng), ca[3] + u(rng)});
  for (int i = 0; i < nb; ++i) pts.push_back({cb[0] + u(rng), cb[1] + u(rng), cb[2] + u(rng), cb[3] + u(rng)});
  return pts;
}

double d2(const Vec4& a, const Vec4& b) {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("assign_cluster_labels") {
  CHECK(assign_cluster_labels({Vec4{0, 0.1, 0.2, 0}, Vec4{1.5, 0.05, 0.1, 1.6}}) ==
        std::array{PatchClass::Stp, PatchClass::Ctp});
  CHECK(assign_cluster_labels({Vec4{1, 2, 3, 4}, Vec4{1, 2, 3, 4}}) == std::array{PatchClass::Stp, PatchClass::Ctp});
  CHECK(assign_cluster_labels({Vec4{1.0, 0, 0, 1.0}, Vec4{0.25, 9, 9, 0.25}}) ==
        std::array{PatchClass::Ctp, PatchClass::Stp});
}

TEST_CASE("classify_patches separates two groups exactly") {
  std::mt19937_64 rng(1);
  const auto pts = two_groups(rng, 10, 10, {0, 1, 1, 0}, {5, 0.2, 0.3, 4}, 0.05);
  const TriageResult r = classify_patches(pts, 42);
  CHECK(r.converged);
  CHECK(r.stp_ids == range(0, 10));
  CHECK(r.ctp_ids == range(10, 20));
  // Converged centers are the group means and every point sits with its nearest one.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool stp = std::binary_search(r.stp_ids.begin(), r.stp_ids.end(), i);
    const double ds = d2(pts[i], r.barycenters[0]), dc = d2(pts[i], r.barycenters[1]);
    CHECK(stp == (ds <= dc));
  }
  Vec4 mean{};
  for (std::size_t i = 0; i < 10; ++i)
    for (int k = 0; k < 4; ++k) mean[k] += pts[i][k] / 10;
  for (int k = 0; k < 4; ++k) CHECK(r.barycenters[0][k] == doctest::Approx(mean[k]).epsilon(1e-12));
}

TEST_CASE("classify_patches degenerate inputs") {
  SUBCASE("identical features") {
    const std::vector<Vec4> pts(7, Vec4{0.3, 0.1, 0.2, 0.4});
    const TriageResult r = classify_patches(pts, 3);
    CHECK(r.stp_ids == range(0, 7));
    CHECK(r.ctp_ids.empty());
  }
  SUBCASE("single feature") {
    const std::vector<Vec4> pts{Vec4{1, 1, 1, 1}};
    const TriageResult r = classify_patches(pts, 0);
    CHECK(r.stp_ids == range(0, 1));
  }
  SUBCASE("empty input") { CHECK_THROWS(classify_patches(std::vector<Vec4>{}, 0)); }
  SUBCASE("bad max_iter") {
    const std::vector<Vec4> pts{Vec4{0, 0, 0, 0}, Vec4{1, 1, 1, 1}};
    CHECK_THROWS(classify_patches(pts, 0, TriageParams{0}));
  }
}

TEST_CASE("classify_patches is deterministic and independent of thread count") {
  std::mt19937_64 rng(9);
  const auto pts = two_groups(rng, 300, 200, {0, 0.1, 0.2, 0}, {1, 0.05, 0.1, 1.2}, 0.6);
  const TriageResult a = classify_patches(pts, 77);
  const TriageResult b = classify_patches(pts, 77);
  CHECK(a == b);
  TriageResult c;
  {
    ScopedJobs one(1);
    c = classify_patches(pts, 77);
  }
  TriageResult d;
  {
    ScopedJobs eight(8);
    d = classify_patches(pts, 77);
  }
  CHECK(a == c);
  CHECK(a == d);
  CHECK(a.seed == 77);
}

TEST_CASE("partition, SSE monotonicity and fixed point on random data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec4> pts(5 + trial);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng), u(rng)};
    const TriageResult r = classify_patches(pts, trial);
    std::set<std::size_t> all(r.stp_ids.begin(), r.stp_ids.end());
    for (auto i : r.ctp_ids) CHECK(all.insert(i).second);
    CHECK(all.size() == pts.size());
    REQUIRE(!r.sse_trace.empty());
    for (std::size_t k = 1; k < r.sse_trace.size(); ++k) CHECK(r.sse_trace[k] <= r.sse_trace[k - 1] + 1e-12);
    CHECK(r.iterations >= 1);
    CHECK(r.iterations <= 100);
    if (r.converged) {
      // Another Lloyd step leaves the assignment and the means unchanged.
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const bool stp = std::binary_search(r.stp_ids.begin(), r.stp_ids.end(), i);
        const double ds = d2(pts[i], r.barycenters[0]), dc = d2(pts[i], r.barycenters[1]);
        CHECK(stp == (ds <= dc));
      }
      for (int cls = 0; cls < 2; ++cls) {
        const auto& ids = cls == 0 ? r.stp_ids : r.ctp_ids;
        if (ids.empty()) continue;
        Vec4 m{};
        for (auto i : ids)
          for (int k = 0; k < 4; ++k) m[k] += pts[i][k];
        for (int k = 0; k < 4; ++k) CHECK(m[k] / ids.size() == doctest::Approx(r.barycenters[cls][k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("max_iter bounds the iteration count") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec4> pts(400);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng), u(rng)};
  const TriageResult r = classify_patches(pts, 1, TriageParams{1});
  CHECK(r.iterations == 1);
}

TEST_CASE("all_ctp") {
  const TriageResult r = all_ctp(4);
  CHECK(r.stp_ids.empty());
  CHECK(r.ctp_ids == range(0, 4));
}

TEST_CASE("serial and parallel nearest assignment agree, ties to cluster 0") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 3);
  std::vector<Vec4> pts(1000);
  for (auto& p : pts) p = {double(u(rng)), double(u(rng)), double(u(rng)), double(u(rng))};
  const std::array<Vec4, 2> centers{Vec4{1, 1, 1, 1}, Vec4{2, 2, 2, 2}};
  std::vector<int> a(pts.size()), b(pts.size());
  kernels::serial::assign_nearest(pts, centers, a);
  kernels::parallel::assign_nearest(pts, centers, b);
  CHECK(a == b);
  const std::vector<Vec4> tie{Vec4{1.5, 1.5, 1.5, 1.5}};
  std::vector<int> t(1, -1);
  kernels::parallel::assign_nearest(tie, centers, t);
  CHECK(t[0] == 0);
}
