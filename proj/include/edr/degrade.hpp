#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "edr/image.hpp"

namespace edr::degrade {

struct BlurStage {
  int size = 7;  // odd
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double theta = 0.0;
  bool operator==(const BlurStage&) const = default;
};

struct DownsampleStage {
  int ratio = 2;  // 1 is the identity, only used by extra rounds
  bool operator==(const DownsampleStage&) const = default;
};

enum class NoiseKind { Gaussian, Poisson };

struct NoiseStage {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma = 1.0;  // Gaussian, intensity units
  double scale = 1.0;  // Poisson: v' = Poisson(v * scale) / scale
  bool operator==(const NoiseStage&) const = default;
};

struct JpegStage {
  int quality = 75;
  bool operator==(const JpegStage&) const = default;
};

struct SincStage {
  int size = 21;  // odd
  double cutoff = std::numbers::pi / 2;  // radians per pixel
  bool operator==(const SincStage&) const = default;
};

using DegradationStage = std::variant<BlurStage, DownsampleStage, NoiseStage, JpegStage, SincStage>;

/// One application of the classic blur -> downsample -> noise -> JPEG model;
/// any stage may be absent but the order is fixed.
struct FirstRound {
  std::optional<BlurStage> blur;
  std::optional<DownsampleStage> downsample;
  std::optional<NoiseStage> noise;
  std::optional<JpegStage> jpeg;
  bool operator==(const FirstRound&) const = default;
};

struct ExtraRound {
  BlurStage blur;
  DownsampleStage downsample;
  bool operator==(const ExtraRound&) const = default;
};

struct DegradationRecipe {
  std::uint64_t seed = 0;
  FirstRound first_round;
  std::vector<ExtraRound> extra_rounds;
  std::optional<SincStage> final_sinc;
  // When > 0, a final bicubic resize to floor(hq / target_scale) on each axis.
  int target_scale = 0;

  int orders() const noexcept { return 1 + static_cast<int>(extra_rounds.size()); }
  /// Flattened execution order (excluding the final resize).
  std::vector<DegradationStage> stages() const;
  int downsample_product() const;
  bool operator==(const DegradationRecipe&) const = default;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const RealRange&) const = default;
};
struct IntRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const IntRange&) const = default;
};

struct DegradeConfig {
  int max_orders = 5;
  int fixed_orders = 0;  // 0 = draw uniformly in [1, max_orders]

  double blur_probability = 0.8;
  double downsample_probability = 1.0;  // first round only
  double noise_probability = 0.5;
  double jpeg_probability = 0.7;
  double sinc_probability = 0.8;
  double isotropic_probability = 0.5;
  double poisson_probability = 0.0;

  RealRange blur_sigma{0.4, 2.4};
  IntRange blur_kernel{7, 21};
  std::vector<int> first_ratios{2, 3, 4};
  std::vector<int> extra_ratios{1, 2};
  RealRange noise_sigma{1.0, 10.0};
  RealRange poisson_scale{0.5, 4.0};
  IntRange jpeg_quality{30, 95};
  RealRange sinc_cutoff{std::numbers::pi / 3, std::numbers::pi};
  IntRange sinc_kernel{7, 21};

  int target_scale = 4;  // 0 disables the final resize

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const DegradeConfig&) const = default;
};

/// Smallest dimension any stage may produce.
inline constexpr int kMinDimension = 8;

DegradationRecipe sample_recipe(std::uint64_t seed, const DegradeConfig& config = {});

/// Applies one stage. `rng` is consumed only by noise stages.
GrayImage apply_stage(const GrayImage& img, const DegradationStage& stage, std::mt19937_64& rng);

GrayImage degrade(const GrayImage& img, const DegradationRecipe& recipe);

/// Output size of degrade() for an input of the given size.
std::pair<int, int> degraded_size(int width, int height, const DegradationRecipe& recipe);

struct PairRecord {
  std::string source;   // file name inside hq_dir
  std::string hq_file;  // relative to out_dir
  std::string lq_file;  // relative to out_dir
  int seed_index = 0;
  std::uint64_t seed = 0;
  DegradationRecipe recipe;
  int hq_width = 0, hq_height = 0;
  int lq_width = 0, lq_height = 0;
  bool operator==(const PairRecord&) const = default;
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  DegradeConfig config;
  std::vector<PairRecord> pairs;
  bool operator==(const DatasetManifest&) const = default;
};

/// Per-task seed from (master seed, source file name, seed index).
std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& source, int seed_index);

/// Writes hq/<stem>_s<k>.png, lq/<stem>_s<k>.png and manifest.json under
/// out_dir for every image in hq_dir (sorted by name) and k in [0, pairs_per_image).
DatasetManifest generate_pairs(const std::filesystem::path& hq_dir, const std::filesystem::path& out_dir,
                               std::uint64_t master_seed, int pairs_per_image,
                               const DegradeConfig& config = {});

/// Rebuilds every lq image recorded in a manifest.
void regenerate(const DatasetManifest& manifest, const std::filesystem::path& hq_dir,
                const std::filesystem::path& out_dir);

}  // namespace edr::degrade
