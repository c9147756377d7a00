#include "edr/detection.hpp"

#include <algorithm>

namespace edr {

const std::vector<std::string>& default_classes() {
  static const std::vector<std::string> classes{"DCR", "BKR", "GLD", "TFM", "IND", "CAP", "GEN", "GND"};
  return classes;
}

double iou(const Box& a, const Box& b) noexcept {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace edr
