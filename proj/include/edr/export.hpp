#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edr/detection.hpp"

namespace edr::exchange {

struct Symbol {
  std::string class_label;
  Box box;
  double score = 1.0;
  bool operator==(const Symbol&) const = default;
};

struct DrawingDescription {
  std::string name;
  int width = 0;
  int height = 0;
  int scale = 1;
  std::vector<Symbol> symbols;
  bool operator==(const DrawingDescription&) const = default;
};

DrawingDescription describe(const std::string& name, int width, int height, int scale,
                            const std::vector<Detection>& dets);

/// Throws SchemaError on a class outside `classes` or a box outside the drawing.
std::string export_xml(const DrawingDescription& desc,
                       const std::vector<std::string>& classes = default_classes());

/// Inverse of export_xml. Scores are read back at their 4-decimal precision.
DrawingDescription parse_xml(const std::string& xml);

/// Ground-truth file: a JSON list of {class, x, y, w, h[, score]}.
/// Entries load as Global detections with score 1 when absent.
std::vector<Detection> parse_annotations(const std::string& text, const std::string& origin = "<memory>");
std::vector<Detection> load_annotations(const std::filesystem::path& path);

/// Detections in the same shape; PatchLocal entries carry their "patch" key.
std::string detections_to_json(const std::vector<Detection>& dets);

}  // namespace edr::exchange
