#pragma once

#include <string>
#include <vector>

namespace edr {

/// Axis-aligned pixel box covering [x, x + w) x [y, y + h).
struct Box {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
  bool operator==(const Box&) const = default;
  long long area() const noexcept { return static_cast<long long>(w) * h; }
};

enum class Frame { PatchLocal, Global };

/// The eight symbol classes used for substation single-line diagrams.
const std::vector<std::string>& default_classes();

struct Detection {
  std::string class_label;
  Box box;
  double score = 1.0;
  Frame frame = Frame::Global;
  std::string patch;  // "r_c" for PatchLocal detections, empty otherwise
  bool operator==(const Detection&) const = default;
};

double iou(const Box& a, const Box& b) noexcept;

}  // namespace edr
