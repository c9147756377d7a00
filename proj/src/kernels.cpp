#include "edr/kernels.hpp"

#include <cmath>
#include <numeric>

#include "edr/error.hpp"

namespace edr::kernels {

double Kernel::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int replicate(int i, int n) noexcept { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

double squared_distance(const Vec4& a, const Vec4& b) noexcept {
  double d = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double t = a[k] - b[k];
    d += t * t;
  }
  return d;
}

std::vector<std::uint8_t> flat_windows(const GrayImage& img, int radius, int (*border)(int, int) noexcept) {
  const int w = img.width(), h = img.height();
  const int span = 2 * radius + 1;
  // Horizontal pass: changes[k] counts value changes along the padded row up
  // to position k, so a window is constant when the count does not move.
  std::vector<std::uint8_t> row_flat(static_cast<std::size_t>(w) * h);
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * radius));
  for (int k = 0; k < w + 2 * radius; ++k) xs[k] = border(k - radius, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto src = img.row(y);
    std::vector<int> changes(xs.size(), 0);
    for (std::size_t k = 1; k < xs.size(); ++k) changes[k] = changes[k - 1] + (src[xs[k]] != src[xs[k - 1]]);
    for (int x = 0; x < w; ++x) row_flat[static_cast<std::size_t>(y) * w + x] = changes[x + span - 1] == changes[x];
  }
  // Vertical pass over the row results: every row window flat and all of them equal.
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h);
  std::vector<int> ys(static_cast<std::size_t>(h + 2 * radius));
  for (int k = 0; k < h + 2 * radius; ++k) ys[k] = border(k - radius, h);
#pragma omp parallel for schedule(static)
  for (int x = 0; x < w; ++x) {
    std::vector<int> bad(ys.size() + 1, 0);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const bool flat = row_flat[static_cast<std::size_t>(ys[k]) * w + x];
      const bool same = k == 0 || img.at(x, ys[k]) == img.at(x, ys[k - 1]);
      bad[k + 1] = bad[k] + (!flat || !same);
    }
    // Entries first + 1 .. last are covered by the counts; `first` needs only its row flag.
    for (int y = 0; y < h; ++y) {
      const int first = y, last = y + span - 1;
      mask[static_cast<std::size_t>(y) * w + x] =
          row_flat[static_cast<std::size_t>(ys[first]) * w + x] && bad[last + 1] == bad[first + 1];
    }
  }
  return mask;
}

GrayImage to_gray(const Plane& plane) {
  GrayImage out(plane.width, plane.height);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = saturate_u8(plane.data[i]);
  return out;
}

namespace {

void check_kernel(const Kernel& k) {
  if (k.width < 1 || k.height < 1 || k.width % 2 == 0 || k.height % 2 == 0 ||
      k.weights.size() != static_cast<std::size_t>(k.width) * k.height) {
    throw ConfigError("filter kernel must be odd-sized with width*height weights");
  }
}

void check_image(const GrayImage& img) {
  if (img.empty()) throw DimensionError("empty image");
}

// Reflect-101 padded copy as doubles; row stride = width + 2 * pad_x.
struct Padded {
  int pad_x, pad_y, stride;
  std::vector<double> data;
};

Padded pad_reflect(const GrayImage& img, int pad_x, int pad_y) {
  Padded p{pad_x, pad_y, img.width() + 2 * pad_x, {}};
  const int rows = img.height() + 2 * pad_y;
  p.data.resize(static_cast<std::size_t>(p.stride) * rows);
  std::vector<int> xs(static_cast<std::size_t>(p.stride));
  for (int x = 0; x < p.stride; ++x) xs[x] = reflect101(x - pad_x, img.width());
  for (int y = 0; y < rows; ++y) {
    auto src = img.row(reflect101(y - pad_y, img.height()));
    double* dst = p.data.data() + static_cast<std::size_t>(y) * p.stride;
    for (int x = 0; x < p.stride; ++x) dst[x] = src[xs[x]];
  }
  return p;
}

double bilateral_spatial(int dx, int dy, double sigma_spatial) {
  return std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_spatial * sigma_spatial));
}

double bilateral_range(int dv, double sigma_range) {
  return std::exp(-static_cast<double>(dv * dv) / (2.0 * sigma_range * sigma_range));
}

}  // namespace

namespace serial {

Plane convolve(const GrayImage& img, const Kernel& kernel) {
  check_image(img);
  check_kernel(kernel);
  const int cx = kernel.width / 2, cy = kernel.height / 2;
  Plane out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.height; ++ky) {
        const int sy = reflect101(y + ky - cy, img.height());
        for (int kx = 0; kx < kernel.width; ++kx) {
          const int sx = reflect101(x + kx - cx, img.width());
          acc += kernel.at(kx, ky) * static_cast<double>(img.at(sx, sy));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range, int radius) {
  check_image(img);
  if (!(sigma_spatial > 0) || !(sigma_range > 0) || radius < 0) throw ConfigError("invalid bilateral parameters");
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int center = img.at(x, y);
      double acc = 0.0, norm = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int sy = reflect101(y + dy, img.height());
        for (int dx = -radius; dx <= radius; ++dx) {
          const int v = img.at(reflect101(x + dx, img.width()), sy);
          const double w = bilateral_spatial(dx, dy, sigma_spatial) * bilateral_range(v - center, sigma_range);
          acc += w * v;
          norm += w;
        }
      }
      out.at(x, y) = saturate_u8(acc / norm);
    }
  }
  return out;
}

void assign_nearest(std::span<const Vec4> points, const std::array<Vec4, 2>& centers, std::span<int> labels) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    labels[i] = squared_distance(points[i], centers[0]) <= squared_distance(points[i], centers[1]) ? 0 : 1;
  }
}

}  // namespace serial

namespace parallel {

Plane convolve(const GrayImage& img, const Kernel& kernel) {
  check_image(img);
  check_kernel(kernel);
  const int cx = kernel.width / 2, cy = kernel.height / 2;
  const Padded pad = pad_reflect(img, cx, cy);
  Plane out(img.width(), img.height());
  const int width = img.width(), height = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.height; ++ky) {
        const double* src = pad.data.data() + static_cast<std::size_t>(y + ky) * pad.stride + x;
        const double* w = kernel.weights.data() + static_cast<std::size_t>(ky) * kernel.width;
        for (int kx = 0; kx < kernel.width; ++kx) acc += w[kx] * src[kx];
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range, int radius) {
  check_image(img);
  if (!(sigma_spatial > 0) || !(sigma_range > 0) || radius < 0) throw ConfigError("invalid bilateral parameters");
  const int side = 2 * radius + 1;
  std::vector<double> spatial(static_cast<std::size_t>(side) * side);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      spatial[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = bilateral_spatial(dx, dy, sigma_spatial);
  std::array<double, 511> range{};
  for (int dv = -255; dv <= 255; ++dv) range[dv + 255] = bilateral_range(dv, sigma_range);

  GrayImage out(img.width(), img.height());
  const int width = img.width(), height = img.height();
  // A constant window normalizes back to its value, as in the reference.
  const std::vector<std::uint8_t> flat = flat_windows(img, radius, reflect101);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    std::vector<int> xs(static_cast<std::size_t>(width + 2 * radius));
    for (int x = 0; x < width + 2 * radius; ++x) xs[x] = reflect101(x - radius, width);
    for (int x = 0; x < width; ++x) {
      const int center = img.at(x, y);
      if (flat[static_cast<std::size_t>(y) * width + x]) {
        out.at(x, y) = static_cast<std::uint8_t>(center);
        continue;
      }
      double acc = 0.0, norm = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const auto src = img.row(reflect101(y + dy, height));
        const double* ws = spatial.data() + static_cast<std::size_t>(dy + radius) * side;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int v = src[xs[x + dx + radius]];
          const double w = ws[dx + radius] * range[v - center + 255];
          acc += w * v;
          norm += w;
        }
      }
      out.at(x, y) = saturate_u8(acc / norm);
    }
  }
  return out;
}

void assign_nearest(std::span<const Vec4> points, const std::array<Vec4, 2>& centers, std::span<int> labels) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    labels[i] = squared_distance(points[i], centers[0]) <= squared_distance(points[i], centers[1]) ? 0 : 1;
  }
}

}  // namespace parallel

}  // namespace edr::kernels
