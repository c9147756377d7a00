#include "edr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "edr/error.hpp"
#include "edr/filters.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"

namespace edr::degrade {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draw helpers built on raw 64-bit output so recipes do not depend on the
// standard library's distribution algorithms.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(splitmix64(seed)) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return unit() < p; }
  double real(const RealRange& r) { return r.lo + (r.hi - r.lo) * unit(); }
  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int integer(int lo, int hi) {
    const auto n = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = rng_();
    } while (v >= limit);
    return lo + static_cast<int>(v % n);
  }
  int odd(const IntRange& r) {
    const int first = r.lo % 2 == 1 ? r.lo : r.lo + 1;
    const int last = r.hi % 2 == 1 ? r.hi : r.hi - 1;
    return first + 2 * integer(0, (last - first) / 2);
  }
  int pick(const std::vector<int>& values) {
    return values[static_cast<std::size_t>(integer(0, static_cast<int>(values.size()) - 1))];
  }

 private:
  std::mt19937_64 rng_;
};

BlurStage sample_blur(Sampler& s, const DegradeConfig& c) {
  BlurStage b;
  b.size = s.odd(c.blur_kernel);
  const bool isotropic = s.bernoulli(c.isotropic_probability);
  b.sigma_x = s.real(c.blur_sigma);
  if (isotropic) {
    b.sigma_y = b.sigma_x;
    b.theta = 0.0;
  } else {
    b.sigma_y = s.real(c.blur_sigma);
    b.theta = s.real(0.0, std::numbers::pi);
  }
  return b;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

void check_range(const RealRange& r, const char* name, double min_lo) {
  if (!(r.lo <= r.hi) || !(r.lo >= min_lo)) throw ConfigError(std::string(name) + " range is invalid");
}

void check_odd_range(const IntRange& r, const char* name) {
  const int first = r.lo % 2 == 1 ? r.lo : r.lo + 1;
  if (r.lo < 1 || r.hi < r.lo || first > r.hi) throw ConfigError(std::string(name) + " must contain an odd size >= 1");
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::mt19937_64& rng) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  auto unit = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  for (std::size_t i = 0; i < src.size(); i += 2) {
    // Box-Muller: two normals per pair of uniforms.
    const double radius = std::sqrt(-2.0 * std::log(unit()));
    const double angle = 2.0 * std::numbers::pi * unit();
    dst[i] = saturate_u8(src[i] + sigma * radius * std::cos(angle));
    if (i + 1 < src.size()) dst[i + 1] = saturate_u8(src[i + 1] + sigma * radius * std::sin(angle));
  }
  return out;
}

GrayImage add_poisson_noise(const GrayImage& img, double scale, std::mt19937_64& rng) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double mean = src[i] * scale;
    if (mean <= 0.0) {
      dst[i] = 0;
      continue;
    }
    std::poisson_distribution<long> draw(mean);
    dst[i] = saturate_u8(static_cast<double>(draw(rng)) / scale);
  }
  return out;
}

}  // namespace

std::vector<DegradationStage> DegradationRecipe::stages() const {
  std::vector<DegradationStage> out;
  if (first_round.blur) out.emplace_back(*first_round.blur);
  if (first_round.downsample) out.emplace_back(*first_round.downsample);
  if (first_round.noise) out.emplace_back(*first_round.noise);
  if (first_round.jpeg) out.emplace_back(*first_round.jpeg);
  for (const ExtraRound& r : extra_rounds) {
    out.emplace_back(r.blur);
    out.emplace_back(r.downsample);
  }
  if (final_sinc) out.emplace_back(*final_sinc);
  return out;
}

int DegradationRecipe::downsample_product() const {
  int p = first_round.downsample ? first_round.downsample->ratio : 1;
  for (const ExtraRound& r : extra_rounds) p *= r.downsample.ratio;
  return p;
}

void DegradeConfig::validate() const {
  if (max_orders < 1) throw ConfigError("max_orders must be >= 1");
  if (fixed_orders < 0 || fixed_orders > max_orders) throw ConfigError("fixed_orders must lie in [0, max_orders]");
  check_probability(blur_probability, "blur_probability");
  check_probability(downsample_probability, "downsample_probability");
  check_probability(noise_probability, "noise_probability");
  check_probability(jpeg_probability, "jpeg_probability");
  check_probability(sinc_probability, "sinc_probability");
  check_probability(isotropic_probability, "isotropic_probability");
  check_probability(poisson_probability, "poisson_probability");
  check_range(blur_sigma, "blur_sigma", 1e-6);
  check_odd_range(blur_kernel, "blur_kernel");
  check_range(noise_sigma, "noise_sigma", 0.0);
  check_range(poisson_scale, "poisson_scale", 1e-6);
  check_odd_range(sinc_kernel, "sinc_kernel");
  if (!(sinc_cutoff.lo > 0.0) || !(sinc_cutoff.lo <= sinc_cutoff.hi) || sinc_cutoff.hi > std::numbers::pi + 1e-12) {
    throw ConfigError("sinc_cutoff must lie in (0, pi]");
  }
  if (jpeg_quality.lo < 1 || jpeg_quality.hi > 100 || jpeg_quality.lo > jpeg_quality.hi) {
    throw ConfigError("jpeg_quality must lie in [1, 100]");
  }
  if (first_ratios.empty() || extra_ratios.empty()) throw ConfigError("downsample ratio sets must be non-empty");
  for (int r : first_ratios)
    if (r < 1) throw ConfigError("downsample ratios must be >= 1");
  for (int r : extra_ratios)
    if (r < 1) throw ConfigError("downsample ratios must be >= 1");
  if (target_scale < 0) throw ConfigError("target_scale must be >= 0");
}

DegradationRecipe sample_recipe(std::uint64_t seed, const DegradeConfig& config) {
  config.validate();
  Sampler s(seed);
  DegradationRecipe r;
  r.seed = seed;
  r.target_scale = config.target_scale;

  if (s.bernoulli(config.blur_probability)) r.first_round.blur = sample_blur(s, config);
  if (s.bernoulli(config.downsample_probability)) r.first_round.downsample = DownsampleStage{s.pick(config.first_ratios)};
  if (s.bernoulli(config.noise_probability)) {
    NoiseStage n;
    if (s.bernoulli(config.poisson_probability)) {
      n.kind = NoiseKind::Poisson;
      n.scale = s.real(config.poisson_scale);
    } else {
      n.kind = NoiseKind::Gaussian;
      n.sigma = s.real(config.noise_sigma);
    }
    r.first_round.noise = n;
  }
  if (s.bernoulli(config.jpeg_probability)) {
    r.first_round.jpeg = JpegStage{s.integer(config.jpeg_quality.lo, config.jpeg_quality.hi)};
  }

  const int orders = config.fixed_orders > 0 ? config.fixed_orders : s.integer(1, config.max_orders);
  for (int k = 1; k < orders; ++k) {
    ExtraRound round;
    round.blur = sample_blur(s, config);
    round.downsample = DownsampleStage{s.pick(config.extra_ratios)};
    r.extra_rounds.push_back(round);
  }
  if (s.bernoulli(config.sinc_probability)) {
    SincStage sinc;
    sinc.size = s.odd(config.sinc_kernel);
    sinc.cutoff = s.real(config.sinc_cutoff);
    r.final_sinc = sinc;
  }
  return r;
}

GrayImage apply_stage(const GrayImage& img, const DegradationStage& stage, std::mt19937_64& rng) {
  if (img.empty()) throw DimensionError("empty image");
  return std::visit(
      [&](const auto& st) -> GrayImage {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, BlurStage>) {
          return filters::convolve(img, filters::anisotropic_gaussian_kernel(st.size, st.sigma_x, st.sigma_y, st.theta));
        } else if constexpr (std::is_same_v<T, DownsampleStage>) {
          if (st.ratio < 1) throw ConfigError("downsample ratio must be >= 1");
          if (st.ratio == 1) return img;
          if (img.width() / st.ratio < kMinDimension || img.height() / st.ratio < kMinDimension) {
            throw TooSmallError("downsampling " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                " by " + std::to_string(st.ratio) + " drops below " + std::to_string(kMinDimension) +
                                " px");
          }
          return filters::downsample_area(img, st.ratio);
        } else if constexpr (std::is_same_v<T, NoiseStage>) {
          if (st.kind == NoiseKind::Gaussian) {
            if (!(st.sigma >= 0)) throw ConfigError("noise sigma must be non-negative");
            return add_gaussian_noise(img, st.sigma, rng);
          }
          if (!(st.scale > 0)) throw ConfigError("Poisson scale must be positive");
          return add_poisson_noise(img, st.scale, rng);
        } else if constexpr (std::is_same_v<T, JpegStage>) {
          return io::jpeg_roundtrip(img, st.quality);
        } else {
          return filters::convolve(img, filters::circular_sinc_kernel(st.size, st.cutoff));
        }
      },
      stage);
}

std::pair<int, int> degraded_size(int width, int height, const DegradationRecipe& recipe) {
  if (recipe.target_scale > 0) return {width / recipe.target_scale, height / recipe.target_scale};
  for (const auto& stage : recipe.stages()) {
    if (const auto* d = std::get_if<DownsampleStage>(&stage)) {
      width /= d->ratio;
      height /= d->ratio;
    }
  }
  return {width, height};
}

GrayImage degrade(const GrayImage& img, const DegradationRecipe& recipe) {
  if (img.empty()) throw DimensionError("empty image");
  std::mt19937_64 noise_rng(splitmix64(recipe.seed ^ 0x6e6f697365ULL));
  GrayImage current = img;
  for (const auto& stage : recipe.stages()) current = apply_stage(current, stage, noise_rng);
  if (recipe.target_scale > 0) {
    const int w = img.width() / recipe.target_scale, h = img.height() / recipe.target_scale;
    if (w < kMinDimension || h < kMinDimension) {
      throw TooSmallError("target scale " + std::to_string(recipe.target_scale) + " drops below " +
                          std::to_string(kMinDimension) + " px");
    }
    if (w != current.width() || h != current.height()) current = filters::resize_bicubic(current, w, h);
  }
  return current;
}

std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& source, int seed_index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : source) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master_seed ^ h) + static_cast<std::uint64_t>(seed_index));
}

namespace {

bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" || ext == ".tiff";
}

template <typename Fn>
void for_each_task(std::size_t count, Fn&& fn) {
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(edr_degrade_tasks)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DatasetManifest generate_pairs(const std::filesystem::path& hq_dir, const std::filesystem::path& out_dir,
                               std::uint64_t master_seed, int pairs_per_image, const DegradeConfig& config) {
  config.validate();
  if (pairs_per_image < 1) throw ConfigError("pairs_per_image must be >= 1");
  std::error_code ec;
  if (!std::filesystem::is_directory(hq_dir, ec)) throw IoError("not a directory: " + hq_dir.string());

  std::vector<std::string> sources;
  for (const auto& entry : std::filesystem::directory_iterator(hq_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) sources.push_back(entry.path().filename().string());
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw IoError("no images found in " + hq_dir.string());

  std::filesystem::create_directories(out_dir / "hq");
  std::filesystem::create_directories(out_dir / "lq");

  DatasetManifest manifest;
  manifest.master_seed = master_seed;
  manifest.config = config;
  manifest.pairs.resize(sources.size() * static_cast<std::size_t>(pairs_per_image));
  for_each_task(manifest.pairs.size(), [&](std::size_t task) {
    const std::string& source = sources[task / pairs_per_image];
    const int k = static_cast<int>(task % pairs_per_image);
    PairRecord rec;
    rec.source = source;
    rec.seed_index = k;
    rec.seed = derive_seed(master_seed, source, k);
    rec.recipe = sample_recipe(rec.seed, config);
    const std::string stem = std::filesystem::path(source).stem().string() + "_s" + std::to_string(k) + ".png";
    rec.hq_file = "hq/" + stem;
    rec.lq_file = "lq/" + stem;

    const GrayImage hq = io::read_gray(hq_dir / source);
    GrayImage lq;
    try {
      lq = degrade(hq, rec.recipe);
    } catch (const TooSmallError& e) {
      throw TooSmallError(source + ": " + e.what());
    }
    io::write_png(out_dir / rec.hq_file, hq);
    io::write_png(out_dir / rec.lq_file, lq);
    rec.hq_width = hq.width();
    rec.hq_height = hq.height();
    rec.lq_width = lq.width();
    rec.lq_height = lq.height();
    manifest.pairs[task] = std::move(rec);
  });

  io::write_text(out_dir / "manifest.json", json(manifest).dump(2) + "\n");
  return manifest;
}

void regenerate(const DatasetManifest& manifest, const std::filesystem::path& hq_dir,
                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "lq");
  for_each_task(manifest.pairs.size(), [&](std::size_t i) {
    const PairRecord& rec = manifest.pairs[i];
    const GrayImage hq = io::read_gray(hq_dir / rec.source);
    io::write_png(out_dir / rec.lq_file, degrade(hq, rec.recipe));
  });
}

}  // namespace edr::degrade
