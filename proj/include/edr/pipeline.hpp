#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "edr/detection.hpp"
#include "edr/image.hpp"
#include "edr/plugin.hpp"
#include "edr/raster.hpp"
#include "edr/stp.hpp"
#include "edr/texture.hpp"
#include "edr/triage.hpp"

namespace edr::pipeline {

/// Restores a batch of patches by a fixed integer scale.
class Restorer {
 public:
  virtual ~Restorer() = default;
  virtual std::string name() const = 0;
  /// One output per batch id, in order, each batch.scale times the input size.
  virtual std::vector<GrayImage> restore(const plugin::PatchBatch& batch) = 0;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  /// PatchLocal detections for the patches in the batch.
  virtual std::vector<Detection> detect(const plugin::PatchBatch& batch) = 0;
};

class IdentityBicubicRestorer final : public Restorer {
 public:
  std::string name() const override { return "identity-bicubic"; }
  std::vector<GrayImage> restore(const plugin::PatchBatch& batch) override;
};

class StpChainRestorer final : public Restorer {
 public:
  explicit StpChainRestorer(stp::StpParams params = {}) : params_(params) {}
  std::string name() const override { return "stp-chain"; }
  std::vector<GrayImage> restore(const plugin::PatchBatch& batch) override;

 private:
  stp::StpParams params_;
};

class PluginRestorer final : public Restorer {
 public:
  explicit PluginRestorer(plugin::PluginSpec spec);
  std::string name() const override { return spec_.executable.filename().string(); }
  std::vector<GrayImage> restore(const plugin::PatchBatch& batch) override;

 private:
  plugin::PluginSpec spec_;
};

class PluginDetector final : public Detector {
 public:
  explicit PluginDetector(plugin::PluginSpec spec);
  std::string name() const override { return spec_.executable.filename().string(); }
  std::vector<Detection> detect(const plugin::PatchBatch& batch) override;

 private:
  plugin::PluginSpec spec_;
};

/// "identity-bicubic" or "stp-chain"; anything else throws ConfigError.
std::unique_ptr<Restorer> make_builtin_restorer(const std::string& name, const stp::StpParams& params = {});

enum class TriageMode {
  Categorized,  // STPs restored heuristically, CTPs by the restorer
  Direct,       // every patch goes to the restorer
};

struct PipelineConfig {
  bool extract_central = true;
  CentralPartOptions central{};
  int restore_patch = 200;
  int restore_overlap = 50;
  int scale = 4;
  int detect_patch = 1000;
  int detect_overlap = 200;
  double iou_thresh = 0.9;
  TriageMode triage_mode = TriageMode::Categorized;
  std::uint64_t seed = 0;
  texture::TextureParams texture{};
  triage::TriageParams triage{};
  stp::StpParams stp{};

  void validate() const;
};

/// Patch size and overlap actually used on an image: the size is capped at
/// the image's smaller side, and the overlap kept below the size.
struct Tiling {
  int patch = 0;
  int overlap = 0;
};
Tiling effective_tiling(int width, int height, int patch, int overlap);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct TriageOutcome {
  CropRect crop;        // region of the input that was sliced
  PatchGrid grid;       // slices of the (cropped) grayscale drawing
  std::vector<texture::GlcmFeatures> features;
  triage::TriageResult result;
  std::vector<triage::PatchClass> labels;  // per patch
};

/// Grayscale drawing -> optional central crop -> slicing -> GLCM features of
/// a globally binarized copy -> two-means triage.
TriageOutcome triage_drawing(const GrayImage& ed, const PipelineConfig& cfg);

struct PipelineReport {
  int total_patches = 0;
  int stp_patches = 0;
  int ctp_patches = 0;
  int restorer_invocations = 0;  // patches handed to the restorer
  std::string restorer;
  std::string detector;
  CropRect crop;
  int scale = 1;
  Tiling restore_tiling;
  Tiling detect_tiling;
  triage::TriageResult triage;
  std::vector<StageTiming> timings;
  GrayImage restored;
  std::vector<Detection> detections;
};

std::pair<GrayImage, PipelineReport> restore_drawing(const GrayImage& ed, const PipelineConfig& cfg,
                                                     Restorer& restorer);

/// PatchLocal -> Global by adding each patch's origin. Throws FrameError on
/// Global input and ProtocolError on unknown patch ids.
std::vector<Detection> to_global(const std::vector<Detection>& local, const PatchGrid& grid);

/// Greedy per-class NMS by descending score (stable on ties): a detection is
/// dropped when its IoU with an already kept one of the same class is >= iou_thresh.
std::vector<Detection> dedup_global(const std::vector<Detection>& dets, double iou_thresh = 0.9);

std::vector<Detection> detect_symbols(const GrayImage& restored, const PipelineConfig& cfg, Detector& detector,
                                      Tiling* used_tiling = nullptr);

PipelineReport run_end_to_end(const GrayImage& lq_ed, const PipelineConfig& cfg, Restorer& restorer,
                              Detector& detector);

}  // namespace edr::pipeline
