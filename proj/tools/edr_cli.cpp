#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edr/config.hpp"
#include "edr/degrade.hpp"
#include "edr/error.hpp"
#include "edr/eval.hpp"
#include "edr/export.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"
#include "edr/parallel.hpp"
#include "edr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace edr;

namespace {

struct Globals {
  fs::path config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool verbose = false;
};

struct PluginFlags {
  fs::path executable;
  std::vector<std::string> args;
  double timeout = 300.0;
  bool keep_workdir = false;

  plugin::PluginSpec spec(plugin::Kind kind) const {
    plugin::PluginSpec s;
    s.executable = executable;
    s.kind = kind;
    s.timeout_seconds = timeout;
    s.extra_args = args;
    s.keep_workdir = keep_workdir;
    return s;
  }
};

AppConfig load(const Globals& g) {
  AppConfig cfg = g.config.empty() ? parse_config("{}") : load_config(g.config);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.pipeline.seed = *g.seed;
  }
  return cfg;
}

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << "[edr] " << msg << "\n";
}

void log_report(const Globals& g, const pipeline::PipelineReport& r) {
  if (!g.verbose) return;
  log(g, "patches: " + std::to_string(r.total_patches) + " total, " + std::to_string(r.stp_patches) + " STP, " +
             std::to_string(r.ctp_patches) + " CTP; restorer invocations " + std::to_string(r.restorer_invocations));
  for (const auto& t : r.timings) log(g, t.stage + ": " + std::to_string(t.seconds) + " s");
}

void add_plugin_flags(CLI::App* cmd, PluginFlags& f, const std::string& prefix) {
  cmd->add_option("--" + prefix + "-arg", f.args, "Extra argument passed to the plug-in (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("--" + prefix + "-timeout", f.timeout, "Plug-in timeout in seconds")->capture_default_str();
  cmd->add_flag("--keep-" + prefix + "-workdir", f.keep_workdir, "Keep the plug-in working directory");
}

std::unique_ptr<pipeline::Restorer> make_restorer(const std::string& name, const PluginFlags& plug,
                                                  const AppConfig& cfg) {
  if (!plug.executable.empty()) return std::make_unique<pipeline::PluginRestorer>(plug.spec(plugin::Kind::Restorer));
  return pipeline::make_builtin_restorer(name, cfg.pipeline.stp);
}

RgbImage overlay(const GrayImage& ed, const pipeline::TriageOutcome& t) {
  RgbImage out{ed.width(), ed.height(), std::vector<std::uint8_t>(ed.pixels().begin(), ed.pixels().end()), {}, {}};
  out.g = out.r;
  out.b = out.r;
  auto tint = [&](std::size_t id, int cr, int cg, int cb) {
    const auto& o = t.grid.origins[id];
    const int w = t.grid.patch_size;
    for (int y = o.row; y < o.row + w; ++y) {
      for (int x = o.col; x < o.col + w; ++x) {
        const std::size_t k = static_cast<std::size_t>(y + t.crop.y) * ed.width() + (x + t.crop.x);
        const int v = ed.at(x + t.crop.x, y + t.crop.y);
        out.r[k] = static_cast<std::uint8_t>((v * 3 + cr * 2) / 5);
        out.g[k] = static_cast<std::uint8_t>((v * 3 + cg * 2) / 5);
        out.b[k] = static_cast<std::uint8_t>((v * 3 + cb * 2) / 5);
      }
    }
  };
  // Complex patches are painted last so overlaps show as complex.
  for (std::size_t id : t.result.stp_ids) tint(id, 40, 200, 60);
  for (std::size_t id : t.result.ctp_ids) tint(id, 230, 40, 40);
  return out;
}

json triage_json(const pipeline::TriageOutcome& t) {
  json patches = json::array();
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const auto& f = t.features[i];
    patches.push_back({{"id", t.grid.patch_id(i)},
                       {"origin", {t.grid.origins[i].row, t.grid.origins[i].col}},
                       {"class", t.labels[i] == triage::PatchClass::Stp ? "STP" : "CTP"},
                       {"dissimilarity", f.raw.dissimilarity},
                       {"homogeneity", f.raw.homogeneity},
                       {"energy", f.raw.energy},
                       {"entropy", f.raw.entropy}});
  }
  return json{{"crop", t.crop},
              {"tiling", {{"patch", t.grid.patch_size}, {"overlap", t.grid.overlap}}},
              {"grid", {t.grid.grid_rows, t.grid.grid_cols}},
              {"counts", {{"total", t.grid.size()}, {"stp", t.result.stp_ids.size()}, {"ctp", t.result.ctp_ids.size()}}},
              {"result", t.result},
              {"patches", patches}};
}

json scores_json(const eval::Scores& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json eval_json(const eval::MatchResult& m, const eval::ScoreTable& t, double iou) {
  json per_class = json::object();
  for (const auto& [cls, tally] : m.per_class) {
    json e = scores_json(t.per_class.at(cls));
    e["tp"] = tally.tp;
    e["fp"] = tally.fp;
    e["fn"] = tally.fn;
    per_class[cls] = e;
  }
  json pairs = json::array();
  for (const auto& p : m.pairs) pairs.push_back({{"pred", p.pred}, {"gt", p.gt}, {"iou", p.iou}});
  return json{{"iou_thresh", iou},
              {"per_class", per_class},
              {"macro", scores_json(t.macro)},
              {"micro", scores_json(t.micro)},
              {"matched", pairs}};
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Engineering-drawing restoration and symbol-recognition toolkit", "edr"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for triage and dataset generation");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose", g.verbose, "Log progress and stage timings to stderr");
  app.fallthrough();

  // config
  auto* c_config = app.add_subcommand("config", "Print the effective configuration");
  bool dump_defaults = false;
  c_config->add_flag("--dump-defaults", dump_defaults, "Print built-in defaults, ignoring --config");

  // degrade
  auto* c_degrade = app.add_subcommand("degrade", "Generate low/high-quality training pairs");
  fs::path hq_dir, out_dir;
  std::optional<int> pairs, target_scale;
  c_degrade->add_option("--hq-dir", hq_dir, "Directory of clean drawings")->required()->check(CLI::ExistingDirectory);
  c_degrade->add_option("--out-dir", out_dir, "Output directory")->required();
  c_degrade->add_option("--pairs", pairs, "Pairs per source image");
  c_degrade->add_option("--target-scale", target_scale, "Resize each lq to hq/N (0 = off)");

  // triage
  auto* c_triage = app.add_subcommand("triage", "Classify patches as simple or complex");
  fs::path input, report_out, overlay_out;
  std::string mode;
  c_triage->add_option("--input", input, "Drawing image")->required()->check(CLI::ExistingFile);
  c_triage->add_option("--report", report_out, "Triage report JSON")->required();
  c_triage->add_option("--overlay", overlay_out, "Color-coded overlay PNG (green = STP, red = CTP)");

  // restore
  auto* c_restore = app.add_subcommand("restore", "Restore a drawing");
  fs::path output;
  std::string restorer_name = "stp-chain";
  PluginFlags rplug;
  bool timings = false;
  c_restore->add_option("--input", input, "Low-quality drawing")->required()->check(CLI::ExistingFile);
  c_restore->add_option("--output", output, "Restored PNG")->required();
  c_restore->add_option("--report", report_out, "Report JSON");
  c_restore->add_option("--restorer", restorer_name, "Built-in restorer for complex patches")
      ->check(CLI::IsMember({"identity-bicubic", "stp-chain"}))
      ->capture_default_str();
  c_restore->add_option("--restorer-plugin", rplug.executable, "External restorer executable");
  add_plugin_flags(c_restore, rplug, "restorer");
  c_restore->add_option("--mode", mode, "categorized or direct (overrides config)")
      ->check(CLI::IsMember({"categorized", "direct"}));
  c_restore->add_flag("--timings", timings, "Include stage timings in the report");

  // detect
  auto* c_detect = app.add_subcommand("detect", "Detect symbols on a restored drawing");
  PluginFlags dplug;
  c_detect->add_option("--input", input, "Restored drawing")->required()->check(CLI::ExistingFile);
  c_detect->add_option("--output", output, "Detections JSON (global frame)")->required();
  c_detect->add_option("--detector-plugin", dplug.executable, "External detector executable")->required();
  add_plugin_flags(c_detect, dplug, "detector");

  // run
  auto* c_run = app.add_subcommand("run", "Restore, detect and export in one pass");
  fs::path run_dir;
  std::string name;
  c_run->add_option("--input", input, "Low-quality drawing")->required()->check(CLI::ExistingFile);
  c_run->add_option("--output-dir", run_dir, "Directory for restored.png, detections.json, report.json, drawing.xml")
      ->required();
  c_run->add_option("--restorer", restorer_name, "Built-in restorer for complex patches")
      ->check(CLI::IsMember({"identity-bicubic", "stp-chain"}))
      ->capture_default_str();
  c_run->add_option("--restorer-plugin", rplug.executable, "External restorer executable");
  add_plugin_flags(c_run, rplug, "restorer");
  c_run->add_option("--detector-plugin", dplug.executable, "External detector executable")->required();
  add_plugin_flags(c_run, dplug, "detector");
  c_run->add_option("--mode", mode, "categorized or direct (overrides config)")
      ->check(CLI::IsMember({"categorized", "direct"}));
  c_run->add_option("--name", name, "Drawing name for the XML (default: input stem)");
  c_run->add_flag("--timings", timings, "Include stage timings in the report");

  // eval
  auto* c_eval = app.add_subcommand("eval", "Score detections and/or compare images");
  fs::path pred, gt, image_a, image_b;
  std::optional<double> iou;
  c_eval->add_option("--pred", pred, "Predicted detections JSON")->check(CLI::ExistingFile);
  c_eval->add_option("--gt", gt, "Ground-truth annotations JSON")->check(CLI::ExistingFile);
  c_eval->add_option("--iou", iou, "IoU threshold (overrides config)");
  c_eval->add_option("--image", image_a, "Image to compare")->check(CLI::ExistingFile);
  c_eval->add_option("--reference", image_b, "Reference image")->check(CLI::ExistingFile);
  c_eval->add_option("--output", output, "Scores JSON (default: stdout)");

  // export-xml
  auto* c_export = app.add_subcommand("export-xml", "Write the XML digital description of a drawing");
  fs::path dets_in, image_in;
  int width = 0, height = 0, scale = 0;
  c_export->add_option("--detections", dets_in, "Detections JSON (global frame)")->required()->check(CLI::ExistingFile);
  c_export->add_option("--image", image_in, "Restored image supplying width and height")->check(CLI::ExistingFile);
  c_export->add_option("--width", width, "Drawing width");
  c_export->add_option("--height", height, "Drawing height");
  c_export->add_option("--scale", scale, "Scale factor (default: pipeline scale)");
  c_export->add_option("--name", name, "Drawing name")->required();
  c_export->add_option("--output", output, "XML file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (g.jobs > 0) set_jobs(g.jobs);

    if (*c_config) {
      std::cout << dump_config(dump_defaults ? AppConfig{} : load(g));
      return 0;
    }

    AppConfig cfg = load(g);
    if (!mode.empty()) {
      cfg.pipeline.triage_mode = mode == "direct" ? pipeline::TriageMode::Direct : pipeline::TriageMode::Categorized;
    }

    if (*c_degrade) {
      if (target_scale) cfg.degrade.target_scale = *target_scale;
      const int n = pairs.value_or(cfg.pairs_per_image);
      const auto manifest = degrade::generate_pairs(hq_dir, out_dir, cfg.seed, n, cfg.degrade);
      log(g, "wrote " + std::to_string(manifest.pairs.size()) + " pairs to " + out_dir.string());
      return 0;
    }

    if (*c_triage) {
      const GrayImage ed = io::read_gray(input);
      const auto t = pipeline::triage_drawing(ed, cfg.pipeline);
      write_json(report_out, triage_json(t));
      if (!overlay_out.empty()) io::write_png(overlay_out, overlay(ed, t));
      log(g, std::to_string(t.result.stp_ids.size()) + " STP / " + std::to_string(t.result.ctp_ids.size()) + " CTP");
      return 0;
    }

    if (*c_restore) {
      const GrayImage ed = io::read_gray(input);
      auto restorer = make_restorer(restorer_name, rplug, cfg);
      auto [restored, report] = pipeline::restore_drawing(ed, cfg.pipeline, *restorer);
      io::write_png(output, restored);
      if (!report_out.empty()) write_json(report_out, pipeline::report_json(report, timings));
      log_report(g, report);
      return 0;
    }

    if (*c_detect) {
      const GrayImage img = io::read_gray(input);
      pipeline::PluginDetector detector(dplug.spec(plugin::Kind::Detector));
      const auto dets = pipeline::detect_symbols(img, cfg.pipeline, detector);
      io::write_text(output, exchange::detections_to_json(dets));
      log(g, std::to_string(dets.size()) + " detections");
      return 0;
    }

    if (*c_run) {
      const GrayImage ed = io::read_gray(input);
      auto restorer = make_restorer(restorer_name, rplug, cfg);
      pipeline::PluginDetector detector(dplug.spec(plugin::Kind::Detector));
      const auto report = pipeline::run_end_to_end(ed, cfg.pipeline, *restorer, detector);
      fs::create_directories(run_dir);
      io::write_png(run_dir / "restored.png", report.restored);
      io::write_text(run_dir / "detections.json", exchange::detections_to_json(report.detections));
      write_json(run_dir / "report.json", pipeline::report_json(report, timings));
      const auto desc = exchange::describe(name.empty() ? input.stem().string() : name, report.restored.width(),
                                           report.restored.height(), report.scale, report.detections);
      io::write_text(run_dir / "drawing.xml", exchange::export_xml(desc));
      log_report(g, report);
      return 0;
    }

    if (*c_eval) {
      if (pred.empty() != gt.empty()) throw ConfigError("--pred and --gt must be given together");
      if (image_a.empty() != image_b.empty()) throw ConfigError("--image and --reference must be given together");
      if (pred.empty() && image_a.empty()) throw ConfigError("nothing to evaluate: give --pred/--gt and/or --image/--reference");
      json out = json::object();
      if (!pred.empty()) {
        const double thr = iou.value_or(cfg.eval_iou);
        const auto [m, t] = eval::match_and_score(exchange::load_annotations(pred), exchange::load_annotations(gt), thr);
        out["detection"] = eval_json(m, t, thr);
      }
      if (!image_a.empty()) {
        const auto im = eval::image_metrics(io::read_gray(image_a), io::read_gray(image_b));
        out["image"] = {{"ssim", im.ssim}, {"grad_l1", im.grad_l1}, {"content_l1", im.content_l1}};
      }
      if (output.empty()) std::cout << out.dump(2) << "\n";
      else write_json(output, out);
      return 0;
    }

    if (*c_export) {
      if (!image_in.empty()) {
        const GrayImage img = io::read_gray(image_in);
        width = img.width();
        height = img.height();
      }
      if (width < 1 || height < 1) throw ConfigError("give --image or both --width and --height");
      const auto desc = exchange::describe(name, width, height, scale > 0 ? scale : cfg.pipeline.scale,
                                           exchange::load_annotations(dets_in));
      io::write_text(output, exchange::export_xml(desc));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "edr: " << e.what() << "\n";
    if (const auto* pe = dynamic_cast<const PluginError*>(&e); pe && !pe->diagnostics().empty()) {
      std::cerr << "--- plug-in diagnostics ---\n" << pe->diagnostics() << "\n";
    }
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "edr: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
