#include "edr/filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "edr/error.hpp"

namespace edr::filters {

using kernels::Kernel;
using kernels::Plane;

namespace {

Kernel normalized(Kernel k) {
  const double s = k.sum();
  for (double& w : k.weights) w /= s;
  return k;
}

void check_size(int size) {
  if (size < 1 || size % 2 == 0) throw ConfigError("kernel size must be odd and positive, got " + std::to_string(size));
}

double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

struct Sobel {
  Plane gx, gy;
};

Sobel sobel(const GrayImage& img) {
  Sobel s{Plane(img.width(), img.height()), Plane(img.width(), img.height())};
  const int w = img.width(), h = img.height();
  auto px = [&](int x, int y) {
    return static_cast<double>(img.at(kernels::replicate(x, w), kernels::replicate(y, h)));
  };
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      s.gx.at(x, y) = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                      (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      s.gy.at(x, y) = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                      (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
    }
  }
  return s;
}

// Four cubic taps along one axis for a source coordinate.
struct CubicTaps {
  std::array<int, 4> index{};     // replicated source index
  std::array<double, 4> offset{};  // tap position minus source coordinate
  std::array<double, 4> weight{};
};

std::vector<CubicTaps> axis_cubic_taps(int out_n, int in_n, double step) {
  std::vector<CubicTaps> taps(static_cast<std::size_t>(out_n));
  for (int o = 0; o < out_n; ++o) {
    const double s = (o + 0.5) * step - 0.5;
    const int i0 = static_cast<int>(std::floor(s));
    for (int k = 0; k < 4; ++k) {
      taps[o].index[k] = kernels::replicate(i0 + k - 1, in_n);
      taps[o].offset[k] = (i0 + k - 1) - s;
      taps[o].weight[k] = cubic_weight(taps[o].offset[k]);
    }
  }
  return taps;
}

// Value of the source pixel whose flat 5x5 neighborhood covers all sixteen taps, or -1.
// Cubic weights sum to one, so such outputs round back to that pixel.
int flat_source(const GrayImage& img, const std::vector<std::uint8_t>& flat, const CubicTaps& tx, const CubicTaps& ty) {
  const int cx = tx.index[1], cy = ty.index[1];
  return flat[static_cast<std::size_t>(cy) * img.width() + cx] ? img.at(cx, cy) : -1;
}

// Interpolates between the taps. When `alpha` > 0 the bicubic weights are
// additionally attenuated by their distance across the edge with unit normal
// (nx, ny), and the two estimates are blended by alpha.
double sample(const GrayImage& img, const CubicTaps& tx, const CubicTaps& ty, double nx, double ny, double alpha,
              double across_sigma) {
  double cubic = 0.0;
  double dir = 0.0, dir_norm = 0.0;
  const double inv = 1.0 / (2.0 * across_sigma * across_sigma);
  for (int j = 0; j < 4; ++j) {
    const double dy = ty.offset[j];
    const double wy = ty.weight[j];
    const int yy = ty.index[j];
    for (int i = 0; i < 4; ++i) {
      const double dx = tx.offset[i];
      const double wgt = tx.weight[i] * wy;
      const double v = img.at(tx.index[i], yy);
      cubic += wgt * v;
      if (alpha > 0.0) {
        const double across = dx * nx + dy * ny;
        const double g = wgt * std::exp(-across * across * inv);
        dir += g * v;
        dir_norm += g;
      }
    }
  }
  if (alpha <= 0.0 || dir_norm < 1e-6) return cubic;
  return (1.0 - alpha) * cubic + alpha * (dir / dir_norm);
}

}  // namespace

Kernel delta_kernel() { return Kernel{}; }

Kernel gaussian_kernel(int size, double sigma) { return anisotropic_gaussian_kernel(size, sigma, sigma, 0.0); }

Kernel anisotropic_gaussian_kernel(int size, double sigma_x, double sigma_y, double theta) {
  check_size(size);
  if (!(sigma_x > 0) || !(sigma_y > 0)) throw ConfigError("Gaussian sigma must be positive");
  Kernel k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int c = size / 2;
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - c, dy = y - c;
      const double u = dx * ct + dy * st;
      const double v = -dx * st + dy * ct;
      k.weights[static_cast<std::size_t>(y) * size + x] =
          std::exp(-(u * u / (2 * sigma_x * sigma_x) + v * v / (2 * sigma_y * sigma_y)));
    }
  }
  return normalized(std::move(k));
}

Kernel log_kernel(double sigma) {
  if (!(sigma > 0)) throw ConfigError("LoG sigma must be positive");
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  const int size = 2 * half + 1;
  Kernel k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const double s2 = sigma * sigma;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r2 = static_cast<double>((x - half) * (x - half) + (y - half) * (y - half));
      k.weights[static_cast<std::size_t>(y) * size + x] =
          -1.0 / (std::numbers::pi * s2 * s2) * (1.0 - r2 / (2 * s2)) * std::exp(-r2 / (2 * s2));
    }
  }
  const double mean = k.sum() / static_cast<double>(k.weights.size());
  for (double& w : k.weights) w -= mean;
  return k;
}

Kernel circular_sinc_kernel(int size, double cutoff) {
  check_size(size);
  if (!(cutoff > 0) || cutoff > std::numbers::pi) throw ConfigError("sinc cutoff must lie in (0, pi]");
  Kernel k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int c = size / 2;
  const double window_radius = c + 1.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r = std::hypot(x - c, y - c);
      double v = r == 0.0 ? cutoff * cutoff / (4.0 * std::numbers::pi)
                          : cutoff * std::cyl_bessel_j(1.0, cutoff * r) / (2.0 * std::numbers::pi * r);
      v *= r < window_radius ? 0.54 + 0.46 * std::cos(std::numbers::pi * r / window_radius) : 0.0;
      k.weights[static_cast<std::size_t>(y) * size + x] = v;
    }
  }
  return normalized(std::move(k));
}

GrayImage convolve(const GrayImage& img, const Kernel& kernel) {
  return kernels::to_gray(kernels::parallel::convolve(img, kernel));
}

GrayImage median3(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  const int w = img.width(), h = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::array<std::uint8_t, 9> win{};
    for (int x = 0; x < w; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          win[n++] = img.at(kernels::reflect101(x + dx, w), kernels::reflect101(y + dy, h));
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out.at(x, y) = win[4];
    }
  }
  return out;
}

GrayImage sharpen_log(const GrayImage& img, double sigma, double amount) {
  const Plane response = kernels::parallel::convolve(img, log_kernel(sigma));
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = saturate_u8(src[i] - amount * response.data[i]);
  return out;
}

GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range) {
  const int radius = static_cast<int>(std::ceil(2.0 * sigma_spatial));
  return kernels::parallel::bilateral(img, sigma_spatial, sigma_range, radius);
}

namespace {

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

// Per-output-sample cubic taps along one axis. When shrinking, the kernel is
// stretched by the reduction factor so that it also acts as the low-pass.
std::vector<Taps> axis_taps(int in, int out) {
  const double f = static_cast<double>(in) / out;
  const double stretch = std::max(1.0, f);
  const double support = 2.0 * stretch;
  std::vector<Taps> taps(out);
  for (int o = 0; o < out; ++o) {
    const double center = (o + 0.5) * f - 0.5;
    Taps& t = taps[o];
    t.first = static_cast<int>(std::floor(center - support)) + 1;
    const int last = static_cast<int>(std::ceil(center + support)) - 1;
    double sum = 0.0;
    for (int i = t.first; i <= last; ++i) {
      const double w = cubic_weight((i - center) / stretch);
      t.weights.push_back(w);
      sum += w;
    }
    for (double& w : t.weights) w /= sum;
  }
  return taps;
}

GrayImage resize_separable(const GrayImage& img, int out_width, int out_height) {
  const int w = img.width(), h = img.height();
  const auto tx = axis_taps(w, out_width);
  const auto ty = axis_taps(h, out_height);
  Plane rows(out_width, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < tx[x].weights.size(); ++k) {
        acc += tx[x].weights[k] * img.at(kernels::replicate(tx[x].first + static_cast<int>(k), w), y);
      }
      rows.at(x, y) = acc;
    }
  }
  GrayImage out(out_width, out_height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ty[y].weights.size(); ++k) {
        acc += ty[y].weights[k] * rows.at(x, kernels::replicate(ty[y].first + static_cast<int>(k), h));
      }
      out.at(x, y) = saturate_u8(acc);
    }
  }
  return out;
}

}  // namespace

GrayImage resize_bicubic(const GrayImage& img, int out_width, int out_height) {
  if (img.empty()) throw DimensionError("empty image");
  if (out_width < 1 || out_height < 1) throw DimensionError("resize target must be positive");
  if (out_width < img.width() || out_height < img.height()) return resize_separable(img, out_width, out_height);
  GrayImage out(out_width, out_height);
  const auto tx = axis_cubic_taps(out_width, img.width(), static_cast<double>(img.width()) / out_width);
  const auto ty = axis_cubic_taps(out_height, img.height(), static_cast<double>(img.height()) / out_height);
  const auto flat = kernels::flat_windows(img, 2, kernels::replicate);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const int copy = flat_source(img, flat, tx[x], ty[y]);
      out.at(x, y) = copy >= 0 ? static_cast<std::uint8_t>(copy) : saturate_u8(sample(img, tx[x], ty[y], 0.0, 0.0, 0.0, 1.0));
    }
  }
  return out;
}

GrayImage upscale_bicubic(const GrayImage& img, int scale) {
  if (scale < 1) throw ConfigError("scale must be >= 1");
  if (scale == 1) return img;
  return resize_bicubic(img, img.width() * scale, img.height() * scale);
}

GrayImage upscale_edge_directed(const GrayImage& img, int scale, const EdgeDirectedParams& params) {
  if (img.empty()) throw DimensionError("empty image");
  if (scale < 1) throw ConfigError("scale must be >= 1");
  if (!(params.edge_threshold > 0) || !(params.across_sigma > 0)) throw ConfigError("invalid edge-directed parameters");
  if (scale == 1) return img;
  const Sobel grad = sobel(img);
  const int w = img.width(), h = img.height();
  const int out_w = w * scale, out_h = h * scale;
  GrayImage out(out_w, out_h);
  const double inv_scale = 1.0 / scale;
  const auto tx = axis_cubic_taps(out_w, w, inv_scale);
  const auto ty = axis_cubic_taps(out_h, h, inv_scale);
  const auto flat = kernels::flat_windows(img, 2, kernels::replicate);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      if (const int copy = flat_source(img, flat, tx[x], ty[y]); copy >= 0) {
        out.at(x, y) = static_cast<std::uint8_t>(copy);
        continue;
      }
      // Strongest gradient among the four nearest source pixels sets the edge.
      double best = -1.0, gx = 0.0, gy = 0.0;
      for (int j = 1; j <= 2; ++j) {
        for (int i = 1; i <= 2; ++i) {
          const int px = tx[x].index[i], py = ty[y].index[j];
          const double cx = grad.gx.at(px, py), cy = grad.gy.at(px, py);
          const double m = cx * cx + cy * cy;
          if (m > best) {
            best = m;
            gx = cx;
            gy = cy;
          }
        }
      }
      const double mag = std::sqrt(best);
      const double alpha = std::clamp((mag - params.edge_threshold) / params.edge_threshold, 0.0, 1.0);
      const double nx = alpha > 0 ? gx / mag : 0.0, ny = alpha > 0 ? gy / mag : 0.0;
      out.at(x, y) = saturate_u8(sample(img, tx[x], ty[y], nx, ny, alpha, params.across_sigma));
    }
  }
  return out;
}

GrayImage downsample_area(const GrayImage& img, int ratio) {
  if (img.empty()) throw DimensionError("empty image");
  if (ratio < 1) throw ConfigError("downsample ratio must be >= 1");
  if (ratio == 1) return img;
  const int out_w = img.width() / ratio, out_h = img.height() / ratio;
  if (out_w < 1 || out_h < 1) throw TooSmallError("downsample by " + std::to_string(ratio) + " empties the image");
  GrayImage out(out_w, out_h);
  const int area = ratio * ratio;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      int sum = 0;
      for (int dy = 0; dy < ratio; ++dy)
        for (int dx = 0; dx < ratio; ++dx) sum += img.at(x * ratio + dx, y * ratio + dy);
      out.at(x, y) = static_cast<std::uint8_t>((sum + area / 2) / area);
    }
  }
  return out;
}

GradientField central_gradient(const GrayImage& img) {
  if (img.empty()) throw DimensionError("empty image");
  const int w = img.width(), h = img.height();
  GradientField g{Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.gx.at(x, y) = 0.5 * (static_cast<double>(img.at(kernels::replicate(x + 1, w), y)) -
                             img.at(kernels::replicate(x - 1, w), y));
      g.gy.at(x, y) = 0.5 * (static_cast<double>(img.at(x, kernels::replicate(y + 1, h))) -
                             img.at(x, kernels::replicate(y - 1, h)));
    }
  }
  return g;
}

double mean_gradient_magnitude(const GrayImage& img) {
  const GradientField g = central_gradient(img);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.gx.data.size(); ++i) acc += std::hypot(g.gx.data[i], g.gy.data[i]);
  return acc / static_cast<double>(g.gx.data.size());
}

}  // namespace edr::filters
