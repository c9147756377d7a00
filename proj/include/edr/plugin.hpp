#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edr/detection.hpp"
#include "edr/image.hpp"
#include "edr/raster.hpp"

namespace edr::plugin {

enum class Kind { Restorer, Detector };

std::string to_string(Kind kind);

struct PluginSpec {
  std::filesystem::path executable;
  Kind kind = Kind::Restorer;
  double timeout_seconds = 300.0;
  std::vector<std::string> extra_args;
  bool keep_workdir = false;

  /// Throws PluginError if the executable is missing or not runnable.
  void validate() const;
};

/// Subset of a grid handed to one plug-in call.
struct PatchBatch {
  const PatchGrid* grid = nullptr;
  std::vector<std::size_t> ids;
  int scale = 1;
};

/// Patch images named as the protocol does: patch_<row>_<col>.png.
std::string patch_file_name(const PatchGrid& grid, std::size_t id);

/// manifest.json describing a batch.
std::string batch_manifest(const PatchBatch& batch, Kind kind);

/// Parses a detector's detections.json. Boxes are checked against the
/// patch bounds (w x w times scale) in PatchLocal coordinates.
std::vector<Detection> parse_detections(const std::string& text, const PatchBatch& batch);

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs argv[0] with the given arguments, capturing output. No shell involved.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds,
                          const std::filesystem::path& log_dir);

/// Restorer call: returns one image per id in batch order, each scale x the input size.
std::vector<GrayImage> invoke_restorer(const PluginSpec& spec, const PatchBatch& batch);

/// Detector call: returns PatchLocal detections.
std::vector<Detection> invoke_detector(const PluginSpec& spec, const PatchBatch& batch);

}  // namespace edr::plugin
