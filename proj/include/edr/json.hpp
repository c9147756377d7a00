#pragma once

// nlohmann/json bindings for the library's value types.

#include <json.hpp>

#include "edr/degrade.hpp"
#include "edr/detection.hpp"
#include "edr/pipeline.hpp"
#include "edr/triage.hpp"

namespace edr {

using json = nlohmann::ordered_json;

void to_json(json& j, const Box& b);
void to_json(json& j, const Detection& d);
void to_json(json& j, const CropRect& r);

namespace texture {
void to_json(json& j, const TextureParams& p);
void from_json(const json& j, TextureParams& p);
}  // namespace texture

namespace stp {
void to_json(json& j, const StpParams& p);
void from_json(const json& j, StpParams& p);
}  // namespace stp

namespace degrade {
void to_json(json& j, const DegradationRecipe& r);
void from_json(const json& j, DegradationRecipe& r);
void to_json(json& j, const DegradeConfig& c);
void from_json(const json& j, DegradeConfig& c);
void to_json(json& j, const PairRecord& p);
void from_json(const json& j, PairRecord& p);
void to_json(json& j, const DatasetManifest& m);
void from_json(const json& j, DatasetManifest& m);
}  // namespace degrade

namespace pipeline {
void to_json(json& j, const PipelineConfig& c);
void from_json(const json& j, PipelineConfig& c);
/// Report without the restored pixels. Timings are included only when asked
/// for, since they are the one non-reproducible part.
json report_json(const PipelineReport& r, bool with_timings);
}  // namespace pipeline

namespace triage {
void to_json(json& j, const TriageResult& r);
}

}  // namespace edr
