#include "edr/json.hpp"

#include <initializer_list>
#include <string>

#include "edr/error.hpp"

namespace edr {

namespace {

// Rejects keys outside `allowed` so that typos in config files surface.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* section) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw ConfigError(std::string(section) + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

json range(double lo, double hi) { return json::array({lo, hi}); }
json range(int lo, int hi) { return json::array({lo, hi}); }

template <typename R>
void read_range(const json& j, const char* key, R& r) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2) throw ConfigError(std::string(key) + ": expected [lo, hi]");
  (*it)[0].get_to(r.lo);
  (*it)[1].get_to(r.hi);
}

}  // namespace

void to_json(json& j, const Box& b) { j = json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

void to_json(json& j, const Detection& d) {
  j = json::object();
  if (d.frame == Frame::PatchLocal) j["patch"] = d.patch;
  j["class"] = d.class_label;
  j["x"] = d.box.x;
  j["y"] = d.box.y;
  j["w"] = d.box.w;
  j["h"] = d.box.h;
  j["score"] = d.score;
}

void to_json(json& j, const CropRect& r) {
  j = json{{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

namespace texture {

void to_json(json& j, const TextureParams& p) {
  json offsets = json::array();
  for (const Offset& o : p.offsets) offsets.push_back(json::array({o.dx, o.dy}));
  j = json{{"levels", p.levels},
           {"offsets", offsets},
           {"weights",
            {{"dissimilarity", p.weights[0]},
             {"homogeneity", p.weights[1]},
             {"energy", p.weights[2]},
             {"entropy", p.weights[3]}}}};
}

void from_json(const json& j, TextureParams& p) {
  check_keys(j, {"levels", "offsets", "weights"}, "texture");
  read(j, "levels", p.levels);
  if (auto it = j.find("offsets"); it != j.end()) {
    p.offsets.clear();
    for (const json& o : *it) {
      if (!o.is_array() || o.size() != 2) throw ConfigError("texture.offsets: expected [dx, dy] pairs");
      p.offsets.push_back({o[0].get<int>(), o[1].get<int>()});
    }
  }
  if (auto it = j.find("weights"); it != j.end()) {
    check_keys(*it, {"dissimilarity", "homogeneity", "energy", "entropy"}, "texture.weights");
    read(*it, "dissimilarity", p.weights[0]);
    read(*it, "homogeneity", p.weights[1]);
    read(*it, "energy", p.weights[2]);
    read(*it, "entropy", p.weights[3]);
  }
}

}  // namespace texture

namespace stp {

void to_json(json& j, const StpParams& p) {
  j = json{{"sigma_spatial", p.sigma_spatial},
           {"sigma_range", p.sigma_range},
           {"stretch_lo", p.stretch_lo},
           {"stretch_hi", p.stretch_hi},
           {"log_sigma", p.log_sigma},
           {"sharpen_amount", p.sharpen_amount},
           {"scale", p.scale},
           {"edge_threshold", p.upscale.edge_threshold},
           {"across_sigma", p.upscale.across_sigma}};
}

void from_json(const json& j, StpParams& p) {
  check_keys(j,
             {"sigma_spatial", "sigma_range", "stretch_lo", "stretch_hi", "log_sigma", "sharpen_amount", "scale",
              "edge_threshold", "across_sigma"},
             "stp");
  read(j, "sigma_spatial", p.sigma_spatial);
  read(j, "sigma_range", p.sigma_range);
  read(j, "stretch_lo", p.stretch_lo);
  read(j, "stretch_hi", p.stretch_hi);
  read(j, "log_sigma", p.log_sigma);
  read(j, "sharpen_amount", p.sharpen_amount);
  read(j, "scale", p.scale);
  read(j, "edge_threshold", p.upscale.edge_threshold);
  read(j, "across_sigma", p.upscale.across_sigma);
}

}  // namespace stp

namespace degrade {

namespace {

json blur_json(const BlurStage& b) {
  return json{{"size", b.size}, {"sigma_x", b.sigma_x}, {"sigma_y", b.sigma_y}, {"theta", b.theta}};
}
BlurStage blur_from(const json& j) {
  BlurStage b;
  read(j, "size", b.size);
  read(j, "sigma_x", b.sigma_x);
  read(j, "sigma_y", b.sigma_y);
  read(j, "theta", b.theta);
  return b;
}

template <typename T, typename Fn>
json optional_json(const std::optional<T>& v, Fn&& fn) {
  return v ? fn(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const DegradationRecipe& r) {
  const FirstRound& f = r.first_round;
  json first{
      {"blur", optional_json(f.blur, blur_json)},
      {"downsample", optional_json(f.downsample, [](const DownsampleStage& d) { return json{{"ratio", d.ratio}}; })},
      {"noise", optional_json(f.noise,
                              [](const NoiseStage& n) {
                                return json{{"kind", n.kind == NoiseKind::Gaussian ? "gaussian" : "poisson"},
                                            {"sigma", n.sigma},
                                            {"scale", n.scale}};
                              })},
      {"jpeg", optional_json(f.jpeg, [](const JpegStage& q) { return json{{"quality", q.quality}}; })},
  };
  json extra = json::array();
  for (const ExtraRound& e : r.extra_rounds) {
    extra.push_back(json{{"blur", blur_json(e.blur)}, {"downsample", {{"ratio", e.downsample.ratio}}}});
  }
  j = json{{"seed", r.seed},
           {"orders", r.orders()},
           {"first_round", first},
           {"extra_rounds", extra},
           {"final_sinc", optional_json(r.final_sinc,
                                        [](const SincStage& s) {
                                          return json{{"size", s.size}, {"cutoff", s.cutoff}};
                                        })},
           {"target_scale", r.target_scale}};
}

void from_json(const json& j, DegradationRecipe& r) {
  r = DegradationRecipe{};
  read(j, "seed", r.seed);
  read(j, "target_scale", r.target_scale);
  const json& f = j.at("first_round");
  if (const json& b = f.at("blur"); !b.is_null()) r.first_round.blur = blur_from(b);
  if (const json& d = f.at("downsample"); !d.is_null()) r.first_round.downsample = DownsampleStage{d.at("ratio")};
  if (const json& n = f.at("noise"); !n.is_null()) {
    NoiseStage s;
    s.kind = n.at("kind").get<std::string>() == "poisson" ? NoiseKind::Poisson : NoiseKind::Gaussian;
    read(n, "sigma", s.sigma);
    read(n, "scale", s.scale);
    r.first_round.noise = s;
  }
  if (const json& q = f.at("jpeg"); !q.is_null()) r.first_round.jpeg = JpegStage{q.at("quality")};
  for (const json& e : j.at("extra_rounds")) {
    r.extra_rounds.push_back({blur_from(e.at("blur")), DownsampleStage{e.at("downsample").at("ratio")}});
  }
  if (const json& s = j.at("final_sinc"); !s.is_null()) r.final_sinc = SincStage{s.at("size"), s.at("cutoff")};
}

void to_json(json& j, const DegradeConfig& c) {
  j = json{{"max_orders", c.max_orders},
           {"fixed_orders", c.fixed_orders},
           {"blur_probability", c.blur_probability},
           {"downsample_probability", c.downsample_probability},
           {"noise_probability", c.noise_probability},
           {"jpeg_probability", c.jpeg_probability},
           {"sinc_probability", c.sinc_probability},
           {"isotropic_probability", c.isotropic_probability},
           {"poisson_probability", c.poisson_probability},
           {"blur_sigma", range(c.blur_sigma.lo, c.blur_sigma.hi)},
           {"blur_kernel", range(c.blur_kernel.lo, c.blur_kernel.hi)},
           {"first_ratios", c.first_ratios},
           {"extra_ratios", c.extra_ratios},
           {"noise_sigma", range(c.noise_sigma.lo, c.noise_sigma.hi)},
           {"poisson_scale", range(c.poisson_scale.lo, c.poisson_scale.hi)},
           {"jpeg_quality", range(c.jpeg_quality.lo, c.jpeg_quality.hi)},
           {"sinc_cutoff", range(c.sinc_cutoff.lo, c.sinc_cutoff.hi)},
           {"sinc_kernel", range(c.sinc_kernel.lo, c.sinc_kernel.hi)},
           {"target_scale", c.target_scale}};
}

void from_json(const json& j, DegradeConfig& c) {
  check_keys(j,
             {"max_orders", "fixed_orders", "blur_probability", "downsample_probability", "noise_probability", "jpeg_probability",
              "sinc_probability", "isotropic_probability", "poisson_probability", "blur_sigma", "blur_kernel",
              "first_ratios", "extra_ratios", "noise_sigma", "poisson_scale", "jpeg_quality", "sinc_cutoff",
              "sinc_kernel", "target_scale"},
             "degrade");
  read(j, "max_orders", c.max_orders);
  read(j, "fixed_orders", c.fixed_orders);
  read(j, "blur_probability", c.blur_probability);
  read(j, "downsample_probability", c.downsample_probability);
  read(j, "noise_probability", c.noise_probability);
  read(j, "jpeg_probability", c.jpeg_probability);
  read(j, "sinc_probability", c.sinc_probability);
  read(j, "isotropic_probability", c.isotropic_probability);
  read(j, "poisson_probability", c.poisson_probability);
  read_range(j, "blur_sigma", c.blur_sigma);
  read_range(j, "blur_kernel", c.blur_kernel);
  read(j, "first_ratios", c.first_ratios);
  read(j, "extra_ratios", c.extra_ratios);
  read_range(j, "noise_sigma", c.noise_sigma);
  read_range(j, "poisson_scale", c.poisson_scale);
  read_range(j, "jpeg_quality", c.jpeg_quality);
  read_range(j, "sinc_cutoff", c.sinc_cutoff);
  read_range(j, "sinc_kernel", c.sinc_kernel);
  read(j, "target_scale", c.target_scale);
}

void to_json(json& j, const PairRecord& p) {
  j = json{{"source", p.source},       {"hq", p.hq_file},           {"lq", p.lq_file},
           {"seed_index", p.seed_index}, {"seed", p.seed},           {"hq_size", {p.hq_width, p.hq_height}},
           {"lq_size", {p.lq_width, p.lq_height}}, {"recipe", p.recipe}};
}

void from_json(const json& j, PairRecord& p) {
  j.at("source").get_to(p.source);
  j.at("hq").get_to(p.hq_file);
  j.at("lq").get_to(p.lq_file);
  j.at("seed_index").get_to(p.seed_index);
  j.at("seed").get_to(p.seed);
  p.hq_width = j.at("hq_size").at(0);
  p.hq_height = j.at("hq_size").at(1);
  p.lq_width = j.at("lq_size").at(0);
  p.lq_height = j.at("lq_size").at(1);
  j.at("recipe").get_to(p.recipe);
}

void to_json(json& j, const DatasetManifest& m) {
  j = json{{"master_seed", m.master_seed}, {"config", m.config}, {"pairs", m.pairs}};
}

void from_json(const json& j, DatasetManifest& m) {
  j.at("master_seed").get_to(m.master_seed);
  m.config = DegradeConfig{};
  from_json(j.at("config"), m.config);
  m.pairs = j.at("pairs").get<std::vector<PairRecord>>();
}

}  // namespace degrade

namespace triage {

void to_json(json& j, const TriageResult& r) {
  j = json{{"seed", r.seed},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"stp_ids", r.stp_ids},
           {"ctp_ids", r.ctp_ids},
           {"barycenters", {{"stp", r.barycenters[0]}, {"ctp", r.barycenters[1]}}},
           {"sse_trace", r.sse_trace}};
}

}  // namespace triage

namespace pipeline {

namespace {

const char* mode_name(TriageMode m) { return m == TriageMode::Direct ? "direct" : "categorized"; }

json tiling_json(const Tiling& t) { return json{{"patch", t.patch}, {"overlap", t.overlap}}; }

}  // namespace

void to_json(json& j, const PipelineConfig& c) {
  json stp = c.stp;
  stp.erase("scale");  // the pipeline scale applies to both paths
  j = json{{"preprocess",
            {{"extract_central", c.extract_central},
             {"denoise", c.central.denoise},
             {"binarize", c.central.binarize},
             {"sharpen", c.central.sharpen},
             {"margin", c.central.margin},
             {"canny_low", c.central.canny_low},
             {"canny_high", c.central.canny_high}}},
           {"texture", c.texture},
           {"triage", {{"mode", mode_name(c.triage_mode)}, {"max_iter", c.triage.max_iter}}},
           {"stp", stp},
           {"pipeline",
            {{"restore_patch", c.restore_patch},
             {"restore_overlap", c.restore_overlap},
             {"scale", c.scale},
             {"detect_patch", c.detect_patch},
             {"detect_overlap", c.detect_overlap},
             {"iou_thresh", c.iou_thresh}}}};
}

void from_json(const json& j, PipelineConfig& c) {
  check_keys(j, {"preprocess", "texture", "triage", "stp", "pipeline"}, "config");
  if (auto it = j.find("preprocess"); it != j.end()) {
    const json& p = *it;
    check_keys(p, {"extract_central", "denoise", "binarize", "sharpen", "margin", "canny_low", "canny_high"},
               "preprocess");
    read(p, "extract_central", c.extract_central);
    read(p, "denoise", c.central.denoise);
    read(p, "binarize", c.central.binarize);
    read(p, "sharpen", c.central.sharpen);
    read(p, "margin", c.central.margin);
    read(p, "canny_low", c.central.canny_low);
    read(p, "canny_high", c.central.canny_high);
  }
  if (auto it = j.find("texture"); it != j.end()) texture::from_json(*it, c.texture);
  if (auto it = j.find("triage"); it != j.end()) {
    check_keys(*it, {"mode", "max_iter"}, "triage");
    read(*it, "max_iter", c.triage.max_iter);
    if (auto m = it->find("mode"); m != it->end()) {
      const auto s = m->get<std::string>();
      if (s == "categorized") c.triage_mode = TriageMode::Categorized;
      else if (s == "direct") c.triage_mode = TriageMode::Direct;
      else throw ConfigError("triage.mode must be 'categorized' or 'direct'");
    }
  }
  if (auto it = j.find("stp"); it != j.end()) {
    if (it->contains("scale")) throw ConfigError("stp: unknown key 'scale' (use pipeline.scale)");
    stp::from_json(*it, c.stp);
  }
  if (auto it = j.find("pipeline"); it != j.end()) {
    const json& p = *it;
    check_keys(p, {"restore_patch", "restore_overlap", "scale", "detect_patch", "detect_overlap", "iou_thresh"},
               "pipeline");
    read(p, "restore_patch", c.restore_patch);
    read(p, "restore_overlap", c.restore_overlap);
    read(p, "scale", c.scale);
    read(p, "detect_patch", c.detect_patch);
    read(p, "detect_overlap", c.detect_overlap);
    read(p, "iou_thresh", c.iou_thresh);
  }
  c.stp.scale = c.scale;
}

json report_json(const PipelineReport& r, bool with_timings) {
  json j{{"restorer", r.restorer},
         {"detector", r.detector},
         {"crop", r.crop},
         {"scale", r.scale},
         {"restore_tiling", tiling_json(r.restore_tiling)},
         {"patches", {{"total", r.total_patches}, {"stp", r.stp_patches}, {"ctp", r.ctp_patches}}},
         {"restorer_invocations", r.restorer_invocations},
         {"restored_size", {r.restored.width(), r.restored.height()}},
         {"triage", r.triage}};
  if (!r.detector.empty()) {
    j["detect_tiling"] = tiling_json(r.detect_tiling);
    j["detections"] = r.detections;
  }
  if (with_timings) {
    json t = json::array();
    for (const StageTiming& s : r.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = t;
  }
  return j;
}

}  // namespace pipeline

}  // namespace edr
