#pragma once

// Data-parallel image kernels. Each kernel has a straightforward serial
// reference in `serial::` and an OpenMP version in `parallel::`; the two are
// required to agree bit-for-bit (tests/test_kernels.cpp) so callers can pick
// either and still be deterministic across thread counts.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "edr/image.hpp"

namespace edr::kernels {

/// Real-valued raster used for intermediate filter responses.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Odd-sized, centered filter kernel, row-major.
struct Kernel {
  int width = 1;
  int height = 1;
  std::vector<double> weights{1.0};

  double at(int x, int y) const { return weights[static_cast<std::size_t>(y) * width + x]; }
  double sum() const;
};

/// Mirror index without repeating the edge sample (dcb|abcd|cba).
int reflect101(int i, int n) noexcept;
int replicate(int i, int n) noexcept;

/// 1 where the (2r+1) x (2r+1) window around a pixel, under `border`
/// indexing, holds a single value. Filters whose weights sum to one can copy
/// such pixels instead of evaluating them.
std::vector<std::uint8_t> flat_windows(const GrayImage& img, int radius, int (*border)(int, int) noexcept);

using Vec4 = std::array<double, 4>;

double squared_distance(const Vec4& a, const Vec4& b) noexcept;

namespace serial {

/// Correlation with `kernel` over a reflect-101 padded image.
Plane convolve(const GrayImage& img, const Kernel& kernel);

GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range, int radius);

/// Label 0 or 1 for each point; ties go to 0.
void assign_nearest(std::span<const Vec4> points, const std::array<Vec4, 2>& centers,
                    std::span<int> labels);

}  // namespace serial

namespace parallel {

Plane convolve(const GrayImage& img, const Kernel& kernel);

GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range, int radius);

void assign_nearest(std::span<const Vec4> points, const std::array<Vec4, 2>& centers,
                    std::span<int> labels);

}  // namespace parallel

/// Saturating conversion of a filter response back to 8 bits.
GrayImage to_gray(const Plane& plane);

}  // namespace edr::kernels
