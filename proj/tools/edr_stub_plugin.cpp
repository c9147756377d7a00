// Deterministic stand-in for external restorer and detector models.
//
//   restorer modes: bicubic (default), fail, wrong-size
//   detector modes: fixed (default), oracle --truth FILE, empty, garbage
//   --sleep-ms N    delay per patch, in any mode

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edr/error.hpp"
#include "edr/filters.hpp"
#include "edr/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  fs::path input_dir;
  fs::path output_dir;
  int scale = 1;
  std::string kind;
  std::string mode;
  int sleep_ms = 0;
  fs::path truth;
  std::string fixed_class = "BKR";
};

void pause(const Options& o) {
  if (o.sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o.sleep_ms));
}

int restore(const Options& o, const json& manifest) {
  const std::string mode = o.mode.empty() ? "bicubic" : o.mode;
  if (mode == "fail") {
    std::cerr << "stub restorer: simulated model failure\n";
    return 7;
  }
  if (mode != "bicubic" && mode != "wrong-size") {
    std::cerr << "stub restorer: unknown mode " << mode << "\n";
    return 2;
  }
  for (const json& p : manifest.at("patches")) {
    const std::string file = p.at("file");
    pause(o);
    const edr::GrayImage in = edr::io::read_gray(o.input_dir / file);
    const int s = mode == "wrong-size" ? o.scale + 1 : o.scale;
    edr::io::write_png(o.output_dir / file, edr::filters::upscale_bicubic(in, s));
  }
  return 0;
}

int detect(const Options& o, const json& manifest) {
  const std::string mode = o.mode.empty() ? "fixed" : o.mode;
  if (mode == "garbage") {
    edr::io::write_text(o.output_dir / "detections.json", "{ this is not json");
    return 0;
  }
  json truth = json::array();
  if (mode == "oracle") {
    if (o.truth.empty()) {
      std::cerr << "stub detector: oracle mode needs --truth\n";
      return 2;
    }
    truth = json::parse(edr::io::read_text(o.truth));
  } else if (mode != "fixed" && mode != "empty") {
    std::cerr << "stub detector: unknown mode " << mode << "\n";
    return 2;
  }

  const int w = manifest.at("w");
  json out = json::array();
  for (const json& p : manifest.at("patches")) {
    pause(o);
    const std::string id = p.at("id");
    if (mode == "fixed") {
      const int side = std::max(1, std::min(10, w - 2));
      out.push_back({{"patch", id}, {"class", o.fixed_class}, {"x", 1}, {"y", 1}, {"w", side}, {"h", side}, {"score", 0.5}});
    } else if (mode == "oracle") {
      // Echo every ground-truth box lying wholly inside this patch.
      const int row = p.at("origin").at(0);
      const int col = p.at("origin").at(1);
      for (const json& t : truth) {
        const int x = t.at("x"), y = t.at("y"), bw = t.at("w"), bh = t.at("h");
        if (x < col || y < row || x + bw > col + w || y + bh > row + w) continue;
        out.push_back({{"patch", id},
                       {"class", t.at("class")},
                       {"x", x - col},
                       {"y", y - row},
                       {"w", bw},
                       {"h", bh},
                       {"score", t.value("score", 1.0)}});
      }
    }
  }
  edr::io::write_text(o.output_dir / "detections.json", out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stub plug-in"};
  Options o;
  app.add_option("--input-dir", o.input_dir)->required();
  app.add_option("--output-dir", o.output_dir)->required();
  app.add_option("--scale", o.scale)->required();
  app.add_option("--kind", o.kind)->required()->check(CLI::IsMember({"restorer", "detector"}));
  app.add_option("--mode", o.mode);
  app.add_option("--sleep-ms", o.sleep_ms);
  app.add_option("--truth", o.truth);
  app.add_option("--class", o.fixed_class);
  CLI11_PARSE(app, argc, argv);

  try {
    const json manifest = json::parse(edr::io::read_text(o.input_dir / "manifest.json"));
    return o.kind == "restorer" ? restore(o, manifest) : detect(o, manifest);
  } catch (const std::exception& e) {
    std::cerr << "stub plug-in: " << e.what() << "\n";
    return 1;
  }
}
