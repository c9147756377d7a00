#include "edr/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <opencv2/imgproc.hpp>

#include "edr/error.hpp"
#include "edr/filters.hpp"

namespace edr {

GrayImage to_grayscale(const RgbImage& rgb) {
  const auto n = static_cast<std::size_t>(rgb.width) * static_cast<std::size_t>(rgb.height);
  if (rgb.width < 1 || rgb.height < 1 || rgb.r.size() != n || rgb.g.size() != n || rgb.b.size() != n) {
    throw DimensionError("RGB channels do not match the stated " + std::to_string(rgb.width) + "x" +
                         std::to_string(rgb.height) + " size");
  }
  GrayImage out(rgb.width, rgb.height);
  auto px = out.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = saturate_u8(0.299 * rgb.r[i] + 0.587 * rgb.g[i] + 0.114 * rgb.b[i]);
  }
  return out;
}

int otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw DimensionError("empty image");
  std::array<double, 256> hist{};
  for (std::uint8_t v : img.pixels()) hist[v] += 1.0;
  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int v = 0; v < 256; ++v) sum_all += v * hist[v];

  int best_t = 0;
  double best = -1.0;
  double n0 = 0.0, s0 = 0.0;
  for (int t = 1; t < 256; ++t) {
    n0 += hist[t - 1];
    s0 += (t - 1) * hist[t - 1];
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double diff = s0 / n0 - (sum_all - s0) / n1;
    const double between = n0 * n1 * diff * diff;
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

GrayImage binarize(const GrayImage& img) {
  const int t = otsu_threshold(img);
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] < t ? 0 : 255;
  return out;
}

CentralPart extract_central_part(const GrayImage& img, const CentralPartOptions& opts) {
  if (img.empty()) throw DimensionError("empty image");
  if (opts.margin < 0) throw ConfigError("margin must be non-negative");
  GrayImage cleaned = img;
  if (opts.denoise) cleaned = filters::median3(cleaned);
  if (opts.binarize) cleaned = binarize(cleaned);
  if (opts.sharpen) cleaned = filters::sharpen_log(cleaned, 1.0, 0.8);

  cv::Mat src(cleaned.height(), cleaned.width(), CV_8UC1, const_cast<std::uint8_t*>(cleaned.pixels().data()));
  cv::Mat edges;
  cv::Canny(src, edges, opts.canny_low, opts.canny_high, 3, false);

  const int w = cleaned.width(), h = cleaned.height();
  int ink_x0 = w, ink_y0 = h, ink_x1 = -1, ink_y1 = -1;
  int edge_x0 = w, edge_y0 = h, edge_x1 = -1, edge_y1 = -1;
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = edges.ptr<std::uint8_t>(y);
    for (int x = 0; x < w; ++x) {
      if (row[x] == 0) continue;
      edge_x0 = std::min(edge_x0, x);
      edge_x1 = std::max(edge_x1, x);
      edge_y0 = std::min(edge_y0, y);
      edge_y1 = std::max(edge_y1, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || cleaned.at(nx, ny) >= 128) continue;
          ink_x0 = std::min(ink_x0, nx);
          ink_x1 = std::max(ink_x1, nx);
          ink_y0 = std::min(ink_y0, ny);
          ink_y1 = std::max(ink_y1, ny);
        }
      }
    }
  }
  if (edge_x1 < 0) throw NoContentError("no edges found; the drawing appears blank");
  if (ink_x1 < 0) {
    ink_x0 = edge_x0;
    ink_x1 = edge_x1;
    ink_y0 = edge_y0;
    ink_y1 = edge_y1;
  }
  const int x0 = std::max(0, ink_x0 - opts.margin);
  const int y0 = std::max(0, ink_y0 - opts.margin);
  const int x1 = std::min(w - 1, ink_x1 + opts.margin);
  const int y1 = std::min(h - 1, ink_y1 + opts.margin);
  const CropRect rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  return {crop(img, rect), rect};
}

std::string PatchGrid::patch_id(std::size_t i) const {
  return std::to_string(grid_row(i)) + "_" + std::to_string(grid_col(i));
}

std::vector<int> axis_anchors(int dim, int w, int p) {
  if (w < 1) throw SizeError("patch size must be positive");
  if (p < 0 || p >= w) {
    throw OverlapError("overlap " + std::to_string(p) + " must lie in [0, " + std::to_string(w) + ")");
  }
  if (w < 1 || w > dim) {
    throw SizeError("patch size " + std::to_string(w) + " does not fit a dimension of " + std::to_string(dim));
  }
  const int stride = w - p;
  std::vector<int> anchors;
  for (int a = 0; a + w <= dim; a += stride) anchors.push_back(a);
  if (anchors.back() + w < dim) anchors.push_back(dim - w);
  return anchors;
}

PatchGrid slice_patches(const GrayImage& img, int w, int p) {
  if (img.empty()) throw DimensionError("empty image");
  if (w < 1) throw SizeError("patch size must be positive");
  if (p < 0 || p >= w) {
    throw OverlapError("overlap " + std::to_string(p) + " must lie in [0, " + std::to_string(w) + ")");
  }
  if (w > std::min(img.width(), img.height())) {
    throw SizeError("patch size " + std::to_string(w) + " exceeds the " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " image");
  }
  const auto rows = axis_anchors(img.height(), w, p);
  const auto cols = axis_anchors(img.width(), w, p);

  PatchGrid grid;
  grid.source_width = img.width();
  grid.source_height = img.height();
  grid.patch_size = w;
  grid.overlap = p;
  grid.grid_rows = static_cast<int>(rows.size());
  grid.grid_cols = static_cast<int>(cols.size());
  grid.origins.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) grid.origins.push_back({r, c});
  grid.patches.resize(grid.origins.size());

  const auto n = static_cast<std::ptrdiff_t>(grid.origins.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    grid.patches[i] = crop(img, {grid.origins[i].col, grid.origins[i].row, w, w});
  }
  return grid;
}

GrayImage merge_patches(const PatchGrid& grid, int scale) {
  if (scale < 1) throw GeometryError("merge scale must be >= 1");
  if (grid.origins.empty() || grid.origins.size() != grid.patches.size()) {
    throw GeometryError("grid has " + std::to_string(grid.origins.size()) + " origins and " +
                        std::to_string(grid.patches.size()) + " patches");
  }
  const int w = grid.patch_size * scale;
  const int out_w = grid.source_width * scale, out_h = grid.source_height * scale;
  for (std::size_t i = 0; i < grid.patches.size(); ++i) {
    const auto& patch = grid.patches[i];
    if (patch.width() != w || patch.height() != w) {
      throw GeometryError("patch " + grid.patch_id(i) + " is " + std::to_string(patch.width()) + "x" +
                          std::to_string(patch.height()) + ", expected " + std::to_string(w) + "x" +
                          std::to_string(w));
    }
    const auto& o = grid.origins[i];
    if (o.row < 0 || o.col < 0 || (o.row + grid.patch_size) > grid.source_height ||
        (o.col + grid.patch_size) > grid.source_width) {
      throw GeometryError("patch " + grid.patch_id(i) + " lies outside the source");
    }
  }

  // Accumulate row by row; each output row only reads the patches covering it,
  // in patch order, so the result does not depend on the thread count.
  GrayImage out(out_w, out_h);
  bool uncovered = false;
#pragma omp parallel for schedule(static) reduction(|| : uncovered)
  for (int y = 0; y < out_h; ++y) {
    std::vector<std::uint32_t> sum(static_cast<std::size_t>(out_w), 0);
    std::vector<std::uint32_t> count(static_cast<std::size_t>(out_w), 0);
    for (std::size_t i = 0; i < grid.patches.size(); ++i) {
      const int top = grid.origins[i].row * scale;
      if (y < top || y >= top + w) continue;
      const int left = grid.origins[i].col * scale;
      auto src = grid.patches[i].row(y - top);
      for (int x = 0; x < w; ++x) {
        sum[left + x] += src[x];
        ++count[left + x];
      }
    }
    auto dst = out.row(y);
    for (int x = 0; x < out_w; ++x) {
      if (count[x] == 0) {
        uncovered = true;
        continue;
      }
      dst[x] = static_cast<std::uint8_t>((sum[x] + count[x] / 2) / count[x]);
    }
  }
  if (uncovered) throw GeometryError("patch grid leaves pixels uncovered");
  return out;
}

}  // namespace edr
