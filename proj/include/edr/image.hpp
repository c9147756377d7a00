#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace edr {

/// Single-channel 8-bit raster, row-major. 0 is ink, 255 is paper.
/// A default-constructed image is empty (0x0); every operation that needs
/// pixels rejects it.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 255);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }
  std::span<const std::uint8_t> row(int y) const {
    return {pixels_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }
  std::span<std::uint8_t> row(int y) {
    return {pixels_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Planar 24-bit raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> r, g, b;
};

struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  bool operator==(const CropRect&) const = default;
};

GrayImage crop(const GrayImage& img, const CropRect& rect);

/// Round to nearest and saturate into [0, 255]. NaN maps to 0.
inline std::uint8_t saturate_u8(double v) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

}  // namespace edr
