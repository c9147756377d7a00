#include "edr/image.hpp"

#include <string>

#include "edr/error.hpp"

namespace edr {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("pixel buffer holds " + std::to_string(pixels_.size()) + " values for a " +
                         std::to_string(width) + "x" + std::to_string(height) + " image");
  }
}

GrayImage crop(const GrayImage& img, const CropRect& rect) {
  if (rect.width < 1 || rect.height < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.width > img.width() ||
      rect.y + rect.height > img.height()) {
    throw DimensionError("crop rectangle outside the image");
  }
  GrayImage out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y) {
    auto src = img.row(rect.y + y).subspan(static_cast<std::size_t>(rect.x), static_cast<std::size_t>(rect.width));
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

}  // namespace edr
