#pragma once

#include <string>
#include <vector>

#include "edr/image.hpp"

namespace edr {

/// ITU-R BT.601 luma, rounded: 0.299 R + 0.587 G + 0.114 B.
GrayImage to_grayscale(const RgbImage& rgb);

/// Otsu threshold over the 256-bin histogram. Pixels below the threshold
/// are foreground. A constant image has no separating threshold and yields
/// 0, i.e. everything is background.
int otsu_threshold(const GrayImage& img);
GrayImage binarize(const GrayImage& img);

struct CentralPartOptions {
  bool denoise = false;   // 3x3 median
  bool binarize = false;  // Otsu
  bool sharpen = false;   // LoG sharpening
  int margin = 8;
  double canny_low = 50.0;
  double canny_high = 150.0;
};

struct CentralPart {
  GrayImage image;  // crop of the *original* image
  CropRect rect;    // in original-image coordinates
};

/// Crops the drawing to the bounding box of its content. Content is located
/// with Canny; the box is taken over the ink pixels (< 128) touching an edge
/// pixel, or over the edge pixels themselves when no such ink exists.
/// Throws NoContentError when Canny finds nothing.
CentralPart extract_central_part(const GrayImage& img, const CentralPartOptions& opts = {});

/// Top-left anchor of a patch, in source pixels.
struct PatchOrigin {
  int row = 0;
  int col = 0;
  bool operator==(const PatchOrigin&) const = default;
};

/// Overlapping w x w tiling of an image. Patches are stored row-major;
/// patch i sits at grid cell (i / grid_cols, i % grid_cols).
struct PatchGrid {
  int source_width = 0;
  int source_height = 0;
  int patch_size = 0;
  int overlap = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<PatchOrigin> origins;
  std::vector<GrayImage> patches;

  std::size_t size() const noexcept { return origins.size(); }
  int grid_row(std::size_t i) const { return static_cast<int>(i) / grid_cols; }
  int grid_col(std::size_t i) const { return static_cast<int>(i) % grid_cols; }
  /// "r_c" identifier used by the plug-in protocol.
  std::string patch_id(std::size_t i) const;
};

/// Anchors along one axis: 0, s, 2s, ... with s = w - p, plus a final
/// edge-anchored dim - w when the regular anchors fall short of the edge.
std::vector<int> axis_anchors(int dim, int w, int p);

PatchGrid slice_patches(const GrayImage& img, int w, int p);

/// Re-assembles a grid; each output pixel is the rounded mean of every
/// covering patch. With scale r, geometry is multiplied by r and patches
/// must be (r*w) x (r*w).
GrayImage merge_patches(const PatchGrid& grid, int scale = 1);

}  // namespace edr
