#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "edr/degrade.hpp"
#include "edr/pipeline.hpp"

namespace edr {

/// Whole-program configuration; each section mirrors a module's parameters.
struct AppConfig {
  pipeline::PipelineConfig pipeline{};
  degrade::DegradeConfig degrade{};
  std::uint64_t seed = 0;  // triage seeding and the dataset master seed
  double eval_iou = 0.9;
  int pairs_per_image = 1;
};

/// Values in `text` override the defaults; unknown keys are rejected.
AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::filesystem::path& path);
std::string dump_config(const AppConfig& cfg);

}  // namespace edr
