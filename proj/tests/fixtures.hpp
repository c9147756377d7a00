#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "edr/detection.hpp"
#include "edr/image.hpp"

namespace fixtures {

using edr::GrayImage;

inline GrayImage random_image(int w, int h, std::mt19937_64& rng, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> v(lo, hi);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) p = static_cast<std::uint8_t>(v(rng));
  return GrayImage(w, h, std::move(px));
}

inline void set(GrayImage& img, int x, int y, int v) {
  if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.at(x, y) = static_cast<std::uint8_t>(v);
}

inline void hline(GrayImage& img, int x0, int x1, int y, int v = 0) {
  for (int x = x0; x <= x1; ++x) set(img, x, y, v);
}
inline void vline(GrayImage& img, int x, int y0, int y1, int v = 0) {
  for (int y = y0; y <= y1; ++y) set(img, x, y, v);
}
inline void rect_outline(GrayImage& img, int x, int y, int w, int h, int v = 0) {
  hline(img, x, x + w - 1, y, v);
  hline(img, x, x + w - 1, y + h - 1, v);
  vline(img, x, y, y + h - 1, v);
  vline(img, x + w - 1, y, y + h - 1, v);
}
inline void fill_rect(GrayImage& img, int x, int y, int w, int h, int v = 0) {
  for (int yy = y; yy < y + h; ++yy) hline(img, x, x + w - 1, yy, v);
}

/// 1-px black line art on white: a lattice of wires with a few boxes.
inline GrayImage line_art(int w, int h, int pitch = 16) {
  GrayImage img(w, h, 255);
  for (int y = pitch / 2; y < h; y += pitch) hline(img, 0, w - 1, y);
  for (int x = pitch / 2; x < w; x += pitch * 2) vline(img, x, 0, h - 1);
  for (int k = 0; 3 * pitch * (k + 1) < std::min(w, h); ++k) {
    rect_outline(img, 3 * pitch * k + 3, 3 * pitch * k + 5, pitch + 3, pitch - 2);
  }
  return img;
}

/// A dense glyph: outline box with a hatched interior and a diagonal.
inline void draw_symbol(GrayImage& img, const edr::Box& b) {
  rect_outline(img, b.x, b.y, b.w, b.h);
  for (int y = b.y + 3; y < b.y + b.h - 2; y += 3) hline(img, b.x + 2, b.x + b.w - 3, y);
  for (int t = 0; t < std::min(b.w, b.h); ++t) set(img, b.x + t, b.y + t, 0);
}

/// White drawing with symbols at the given boxes, joined by thin wires.
inline GrayImage synthetic_ed(int w, int h, const std::vector<edr::Detection>& symbols) {
  GrayImage img(w, h, 255);
  for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
    const auto& a = symbols[k].box;
    const auto& b = symbols[k + 1].box;
    const int ya = a.y + a.h / 2, xb = b.x + b.w / 2;
    hline(img, std::min(a.x + a.w, xb), std::max(a.x + a.w, xb), ya);
    vline(img, xb, std::min(ya, b.y), std::max(ya, b.y));
  }
  for (const auto& s : symbols) draw_symbol(img, s.box);
  return img;
}

inline edr::Detection gt(const std::string& cls, int x, int y, int w, int h, double score = 1.0) {
  edr::Detection d;
  d.class_label = cls;
  d.box = {x, y, w, h};
  d.score = score;
  return d;
}

}  // namespace fixtures
