#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edr/image.hpp"

namespace edr::io {

/// Reads any format OpenCV can decode; color input is reduced with to_grayscale.
GrayImage read_gray(const std::filesystem::path& path);
RgbImage read_rgb(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);

std::vector<unsigned char> encode_png(const GrayImage& img);
GrayImage decode_image(const std::vector<unsigned char>& bytes);

/// Baseline JPEG encode at `quality` followed by decode.
GrayImage jpeg_roundtrip(const GrayImage& img, int quality);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace edr::io
