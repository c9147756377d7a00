#include "edr/config.hpp"

#include "edr/error.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"

namespace edr {

AppConfig parse_config(const std::string& text) {
  AppConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    json pipeline_part = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "seed") {
        it->get_to(cfg.seed);
      } else if (key == "degrade") {
        degrade::from_json(*it, cfg.degrade);
      } else if (key == "eval") {
        for (auto e = it->begin(); e != it->end(); ++e) {
          if (e.key() != "iou_thresh") throw ConfigError("eval: unknown key '" + e.key() + "'");
          e->get_to(cfg.eval_iou);
        }
      } else if (key == "dataset") {
        for (auto e = it->begin(); e != it->end(); ++e) {
          if (e.key() != "pairs_per_image") throw ConfigError("dataset: unknown key '" + e.key() + "'");
          e->get_to(cfg.pairs_per_image);
        }
      } else {
        pipeline_part[key] = *it;
      }
    }
    pipeline::from_json(pipeline_part, cfg.pipeline);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.pipeline.seed = cfg.seed;
  cfg.pipeline.validate();
  cfg.degrade.validate();
  if (!(cfg.eval_iou > 0.0 && cfg.eval_iou <= 1.0)) throw ConfigError("eval.iou_thresh must lie in (0, 1]");
  if (cfg.pairs_per_image < 1) throw ConfigError("dataset.pairs_per_image must be >= 1");
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_text(path)); }

std::string dump_config(const AppConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  const json pipeline_part = cfg.pipeline;
  for (auto it = pipeline_part.begin(); it != pipeline_part.end(); ++it) j[it.key()] = *it;
  j["degrade"] = cfg.degrade;
  j["eval"] = {{"iou_thresh", cfg.eval_iou}};
  j["dataset"] = {{"pairs_per_image", cfg.pairs_per_image}};
  return j.dump(2) + "\n";
}

}  // namespace edr
