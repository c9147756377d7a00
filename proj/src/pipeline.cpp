#include "edr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <numeric>

#include "edr/error.hpp"
#include "edr/filters.hpp"

namespace edr::pipeline {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
std::vector<GrayImage> map_patches(const plugin::PatchBatch& batch, Fn&& fn) {
  std::vector<GrayImage> out(batch.ids.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(batch.ids.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = fn(batch.grid->patches[batch.ids[i]]);
    } catch (...) {
#pragma omp critical(edr_map_patches)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

std::vector<GrayImage> IdentityBicubicRestorer::restore(const plugin::PatchBatch& batch) {
  return map_patches(batch, [&](const GrayImage& p) { return filters::upscale_bicubic(p, batch.scale); });
}

std::vector<GrayImage> StpChainRestorer::restore(const plugin::PatchBatch& batch) {
  stp::StpParams params = params_;
  params.scale = batch.scale;
  return map_patches(batch, [&](const GrayImage& p) { return stp::restore_stp(p, params); });
}

PluginRestorer::PluginRestorer(plugin::PluginSpec spec) : spec_(std::move(spec)) {
  spec_.kind = plugin::Kind::Restorer;
  spec_.validate();
}

std::vector<GrayImage> PluginRestorer::restore(const plugin::PatchBatch& batch) {
  return plugin::invoke_restorer(spec_, batch);
}

PluginDetector::PluginDetector(plugin::PluginSpec spec) : spec_(std::move(spec)) {
  spec_.kind = plugin::Kind::Detector;
  spec_.validate();
}

std::vector<Detection> PluginDetector::detect(const plugin::PatchBatch& batch) {
  return plugin::invoke_detector(spec_, batch);
}

std::unique_ptr<Restorer> make_builtin_restorer(const std::string& name, const stp::StpParams& params) {
  if (name == "identity-bicubic") return std::make_unique<IdentityBicubicRestorer>();
  if (name == "stp-chain") return std::make_unique<StpChainRestorer>(params);
  throw ConfigError("unknown built-in restorer '" + name + "' (expected identity-bicubic or stp-chain)");
}

void PipelineConfig::validate() const {
  if (restore_patch < 1 || detect_patch < 1) throw ConfigError("patch sizes must be positive");
  if (restore_overlap < 0 || detect_overlap < 0) throw ConfigError("overlaps must be non-negative");
  if (restore_overlap >= restore_patch) throw OverlapError("restore overlap must be smaller than the patch size");
  if (detect_overlap >= detect_patch) throw OverlapError("detect overlap must be smaller than the patch size");
  if (scale < 1) throw ConfigError("scale must be >= 1");
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) throw ConfigError("IoU threshold must lie in (0, 1]");
  if (texture.levels < 2 || texture.levels > 256) throw ConfigError("GLCM levels must lie in [2, 256]");
  if (texture.offsets.empty()) throw ConfigError("at least one GLCM offset is required");
  if (triage.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  stp.validate();
}

Tiling effective_tiling(int width, int height, int patch, int overlap) {
  Tiling t;
  t.patch = std::min({patch, width, height});
  t.overlap = overlap < t.patch ? overlap : t.patch / 4;
  return t;
}

TriageOutcome triage_drawing(const GrayImage& ed, const PipelineConfig& cfg) {
  cfg.validate();
  if (ed.empty()) throw DimensionError("empty drawing");
  TriageOutcome out;
  GrayImage body;
  if (cfg.extract_central) {
    CentralPart cp = extract_central_part(ed, cfg.central);
    body = std::move(cp.image);
    out.crop = cp.rect;
  } else {
    body = ed;
    out.crop = {0, 0, ed.width(), ed.height()};
  }
  const Tiling t = effective_tiling(body.width(), body.height(), cfg.restore_patch, cfg.restore_overlap);
  out.grid = slice_patches(body, t.patch, t.overlap);
  // Features come from one global binarization so the background level is
  // the same in every patch.
  const PatchGrid binary = slice_patches(binarize(body), t.patch, t.overlap);
  out.features = texture::parallel::batch_features(binary.patches, cfg.texture);

  if (cfg.triage_mode == TriageMode::Direct) {
    out.result = triage::all_ctp(out.grid.size());
  } else {
    std::vector<kernels::Vec4> vecs;
    vecs.reserve(out.features.size());
    for (const auto& f : out.features) vecs.push_back(f.weighted);
    out.result = triage::classify_patches(vecs, cfg.seed, cfg.triage);
  }
  out.labels.assign(out.grid.size(), triage::PatchClass::Stp);
  for (std::size_t id : out.result.ctp_ids) out.labels[id] = triage::PatchClass::Ctp;
  return out;
}

std::pair<GrayImage, PipelineReport> restore_drawing(const GrayImage& ed, const PipelineConfig& cfg,
                                                     Restorer& restorer) {
  PipelineReport report;
  Stopwatch clock;
  TriageOutcome tri = triage_drawing(ed, cfg);
  report.timings.push_back({"preprocess+triage", clock.lap()});

  report.crop = tri.crop;
  report.scale = cfg.scale;
  report.restore_tiling = {tri.grid.patch_size, tri.grid.overlap};
  report.total_patches = static_cast<int>(tri.grid.size());
  report.stp_patches = static_cast<int>(tri.result.stp_ids.size());
  report.ctp_patches = static_cast<int>(tri.result.ctp_ids.size());
  report.restorer = restorer.name();

  PatchGrid restored = tri.grid;
  {
    stp::StpParams params = cfg.stp;
    params.scale = cfg.scale;
    StpChainRestorer chain(params);
    const plugin::PatchBatch batch{&tri.grid, tri.result.stp_ids, cfg.scale};
    auto out = chain.restore(batch);
    for (std::size_t k = 0; k < batch.ids.size(); ++k) restored.patches[batch.ids[k]] = std::move(out[k]);
  }
  report.timings.push_back({"restore-stp", clock.lap()});

  if (!tri.result.ctp_ids.empty()) {
    const plugin::PatchBatch batch{&tri.grid, tri.result.ctp_ids, cfg.scale};
    auto out = restorer.restore(batch);
    report.restorer_invocations = static_cast<int>(batch.ids.size());
    if (out.size() != batch.ids.size()) {
      throw ProtocolError("restorer " + restorer.name() + " returned " + std::to_string(out.size()) +
                          " patches for " + std::to_string(batch.ids.size()));
    }
    for (std::size_t k = 0; k < batch.ids.size(); ++k) restored.patches[batch.ids[k]] = std::move(out[k]);
  }
  report.timings.push_back({"restore-ctp", clock.lap()});

  GrayImage merged = merge_patches(restored, cfg.scale);
  report.timings.push_back({"merge", clock.lap()});
  report.triage = std::move(tri.result);
  report.restored = merged;
  return {std::move(merged), std::move(report)};
}

std::vector<Detection> to_global(const std::vector<Detection>& local, const PatchGrid& grid) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < grid.size(); ++i) index.emplace(grid.patch_id(i), i);
  std::vector<Detection> out;
  out.reserve(local.size());
  for (const Detection& d : local) {
    if (d.frame != Frame::PatchLocal) throw FrameError("expected PatchLocal detections");
    const auto it = index.find(d.patch);
    if (it == index.end()) throw ProtocolError("detection refers to unknown patch '" + d.patch + "'");
    Detection g = d;
    g.box.x += grid.origins[it->second].col;
    g.box.y += grid.origins[it->second].row;
    g.frame = Frame::Global;
    g.patch.clear();
    if (g.box.x + g.box.w > grid.source_width || g.box.y + g.box.h > grid.source_height) {
      throw ProtocolError("detection in patch " + d.patch + " extends past the image");
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Detection> dedup_global(const std::vector<Detection>& dets, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) throw ConfigError("IoU threshold must lie in (0, 1]");
  for (const Detection& d : dets)
    if (d.frame != Frame::Global) throw FrameError("dedup_global needs Global-frame detections");
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<Detection> kept;
  std::map<std::string, std::vector<std::size_t>> kept_by_class;
  for (std::size_t i : order) {
    auto& same = kept_by_class[dets[i].class_label];
    const bool suppressed =
        std::any_of(same.begin(), same.end(), [&](std::size_t k) { return iou(kept[k].box, dets[i].box) >= iou_thresh; });
    if (suppressed) continue;
    same.push_back(kept.size());
    kept.push_back(dets[i]);
  }
  return kept;
}

std::vector<Detection> detect_symbols(const GrayImage& restored, const PipelineConfig& cfg, Detector& detector,
                                      Tiling* used_tiling) {
  cfg.validate();
  const Tiling t = effective_tiling(restored.width(), restored.height(), cfg.detect_patch, cfg.detect_overlap);
  if (used_tiling) *used_tiling = t;
  const PatchGrid grid = slice_patches(restored, t.patch, t.overlap);
  plugin::PatchBatch batch{&grid, std::vector<std::size_t>(grid.size()), 1};
  std::iota(batch.ids.begin(), batch.ids.end(), 0);
  const auto local = detector.detect(batch);
  return dedup_global(to_global(local, grid), cfg.iou_thresh);
}

PipelineReport run_end_to_end(const GrayImage& lq_ed, const PipelineConfig& cfg, Restorer& restorer,
                              Detector& detector) {
  auto [restored, report] = restore_drawing(lq_ed, cfg, restorer);
  Stopwatch clock;
  report.detector = detector.name();
  report.detections = detect_symbols(restored, cfg, detector, &report.detect_tiling);
  report.timings.push_back({"detect", clock.lap()});
  return std::move(report);
}

}  // namespace edr::pipeline
