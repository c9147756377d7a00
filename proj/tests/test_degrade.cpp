#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "edr/degrade.hpp"
#include "edr/error.hpp"
#include "edr/filters.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace edr;
using namespace edr::degrade;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::string t = (fs::temp_directory_path() / "edr-test-XXXXXX").string();
    path = ::mkdtemp(t.data());
  }
  ~TempDir() { fs::remove_all(path); }
};

DegradeConfig quiet() {
  DegradeConfig c;
  c.blur_probability = c.noise_probability = c.jpeg_probability = c.sinc_probability = 0.0;
  return c;
}

double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(int(a.pixels()[i]) - int(b.pixels()[i]));
  return s / a.size();
}

int max_abs_diff(const GrayImage& a, const GrayImage& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(int(a.pixels()[i]) - int(b.pixels()[i])));
  return m;
}

}  // namespace

TEST_CASE("sample_recipe is deterministic") {
  for (std::uint64_t seed : {0ull, 1ull, 123456789ull}) CHECK(sample_recipe(seed) == sample_recipe(seed));
  CHECK(!(sample_recipe(1) == sample_recipe(2)));
}

TEST_CASE("sample_recipe respects max_orders and parameter ranges") {
  const DegradeConfig c;
  std::vector<int> seen(6, 0);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const DegradationRecipe r = sample_recipe(seed, c);
    REQUIRE(r.orders() >= 1);
    REQUIRE(r.orders() <= 5);
    ++seen[r.orders()];
    auto check_blur = [&](const BlurStage& b) {
      CHECK(b.size % 2 == 1);
      CHECK(b.size >= c.blur_kernel.lo);
      CHECK(b.size <= c.blur_kernel.hi);
      CHECK(b.sigma_x >= c.blur_sigma.lo);
      CHECK(b.sigma_x <= c.blur_sigma.hi);
      CHECK(b.sigma_y >= c.blur_sigma.lo);
      CHECK(b.sigma_y <= c.blur_sigma.hi);
    };
    if (r.first_round.blur) check_blur(*r.first_round.blur);
    REQUIRE(r.first_round.downsample);
    CHECK(std::count(c.first_ratios.begin(), c.first_ratios.end(), r.first_round.downsample->ratio) == 1);
    if (r.first_round.noise) {
      CHECK(r.first_round.noise->kind == NoiseKind::Gaussian);
      CHECK(r.first_round.noise->sigma >= c.noise_sigma.lo);
      CHECK(r.first_round.noise->sigma <= c.noise_sigma.hi);
    }
    if (r.first_round.jpeg) {
      CHECK(r.first_round.jpeg->quality >= c.jpeg_quality.lo);
      CHECK(r.first_round.jpeg->quality <= c.jpeg_quality.hi);
    }
    for (const ExtraRound& e : r.extra_rounds) {
      check_blur(e.blur);
      CHECK((e.downsample.ratio == 1 || e.downsample.ratio == 2));
    }
    if (r.final_sinc) {
      CHECK(r.final_sinc->cutoff >= c.sinc_cutoff.lo);
      CHECK(r.final_sinc->cutoff <= c.sinc_cutoff.hi);
      CHECK(r.final_sinc->size % 2 == 1);
    }
  }
  for (int k = 1; k <= 5; ++k) CHECK(seen[k] > 0);
}

TEST_CASE("zero probabilities leave only the first-round downsample") {
  const DegradationRecipe r = sample_recipe(7, quiet());
  CHECK(!r.first_round.blur);
  CHECK(r.first_round.downsample);
  CHECK(!r.first_round.noise);
  CHECK(!r.first_round.jpeg);
  CHECK(!r.final_sinc);
  const auto stages = r.stages();
  CHECK(std::holds_alternative<DownsampleStage>(stages.front()));
}

TEST_CASE("stage order follows blur, downsample, noise, jpeg, extra rounds, sinc") {
  DegradeConfig c;
  c.blur_probability = c.noise_probability = c.jpeg_probability = c.sinc_probability = 1.0;
  c.fixed_orders = 3;
  const auto stages = sample_recipe(3, c).stages();
  REQUIRE(stages.size() == 4 + 2 * 2 + 1);
  CHECK(std::holds_alternative<BlurStage>(stages[0]));
  CHECK(std::holds_alternative<DownsampleStage>(stages[1]));
  CHECK(std::holds_alternative<NoiseStage>(stages[2]));
  CHECK(std::holds_alternative<JpegStage>(stages[3]));
  CHECK(std::holds_alternative<BlurStage>(stages[4]));
  CHECK(std::holds_alternative<DownsampleStage>(stages[5]));
  CHECK(std::holds_alternative<BlurStage>(stages[6]));
  CHECK(std::holds_alternative<DownsampleStage>(stages[7]));
  CHECK(std::holds_alternative<SincStage>(stages[8]));
}

TEST_CASE("invalid configurations are rejected") {
  auto bad = [](auto mutate) {
    DegradeConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.blur_probability = 1.5; })), ConfigError);
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.blur_sigma = {2, 1}; })), ConfigError);
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.jpeg_quality = {0, 50}; })), ConfigError);
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.first_ratios.clear(); })), ConfigError);
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.fixed_orders = 6; })), ConfigError);
  CHECK_THROWS_AS(sample_recipe(0, bad([](DegradeConfig& c) { c.sinc_cutoff = {0.0, 1.0}; })), ConfigError);
}

TEST_CASE("apply_stage contracts") {
  std::mt19937_64 rng(1);
  std::mt19937_64 noise(2);
  const GrayImage img = fixtures::random_image(200, 200, rng);
  SUBCASE("downsample by 4") {
    const GrayImage out = apply_stage(img, DownsampleStage{4}, noise);
    CHECK(out.width() == 50);
    CHECK(out.height() == 50);
    CHECK(out == oracle::area_average(img, 4));
  }
  SUBCASE("delta blur is the identity") {
    CHECK(apply_stage(img, BlurStage{1, 1.0, 1.0, 0.0}, noise) == img);
    CHECK(filters::convolve(img, filters::delta_kernel()) == img);
  }
  SUBCASE("too small") { CHECK_THROWS_AS(apply_stage(GrayImage(20, 20), DownsampleStage{3}, noise), TooSmallError); }
  SUBCASE("gaussian noise changes pixels but keeps range and size") {
    const GrayImage out = apply_stage(img, NoiseStage{NoiseKind::Gaussian, 8.0, 1.0}, noise);
    CHECK(out.width() == img.width());
    CHECK(!(out == img));
  }
  SUBCASE("poisson noise") {
    const GrayImage out = apply_stage(GrayImage(32, 32, 100), NoiseStage{NoiseKind::Poisson, 1.0, 0.5}, noise);
    CHECK(!(out == GrayImage(32, 32, 100)));
  }
  SUBCASE("sinc keeps flat images flat") {
    CHECK(apply_stage(GrayImage(40, 40, 90), SincStage{21, 1.2}, noise) == GrayImage(40, 40, 90));
  }
}

TEST_CASE("noise stage draws depend only on the rng state") {
  const GrayImage img(64, 64, 128);
  std::mt19937_64 a(5), b(5);
  CHECK(apply_stage(img, NoiseStage{NoiseKind::Gaussian, 5.0, 1.0}, a) ==
        apply_stage(img, NoiseStage{NoiseKind::Gaussian, 5.0, 1.0}, b));
}

TEST_CASE("JPEG round trip error grows as quality falls") {
  const GrayImage art = fixtures::line_art(256, 256, 16);
  const GrayImage q95 = io::jpeg_roundtrip(art, 95);
  const GrayImage q10 = io::jpeg_roundtrip(art, 10);
  CHECK(max_abs_diff(art, q95) <= 12);
  CHECK(mean_abs_diff(art, q10) > mean_abs_diff(art, q95));
}

TEST_CASE("degrade: single downsample equals the area-average oracle") {
  std::mt19937_64 rng(3);
  const GrayImage img = fixtures::random_image(123, 77, rng);
  DegradationRecipe r;
  r.first_round.downsample = DownsampleStage{4};
  const GrayImage out = degrade::degrade(img, r);
  CHECK(out.width() == 30);
  CHECK(out.height() == 19);
  CHECK(out == oracle::area_average(img, 4));
}

TEST_CASE("degrade is byte-identical for the same recipe") {
  const GrayImage art = fixtures::line_art(256, 256);
  DegradeConfig c;
  c.noise_probability = 1.0;
  c.jpeg_probability = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DegradationRecipe r = sample_recipe(seed, c);
    CHECK(io::encode_png(degrade::degrade(art, r)) == io::encode_png(degrade::degrade(art, r)));
  }
}

TEST_CASE("dimension algebra without the final resize") {
  DegradeConfig c;
  c.target_scale = 0;
  const GrayImage art = fixtures::line_art(517, 389);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DegradationRecipe r = sample_recipe(seed, c);
    int w = 517, h = 389;
    for (const auto& st : r.stages())
      if (const auto* d = std::get_if<DownsampleStage>(&st)) w /= d->ratio, h /= d->ratio;
    if (w < kMinDimension || h < kMinDimension) {
      CHECK_THROWS_AS(degrade::degrade(art, r), TooSmallError);
      continue;
    }
    const GrayImage out = degrade::degrade(art, r);
    CHECK(out.width() == w);
    CHECK(out.height() == h);
    CHECK(degraded_size(517, 389, r) == std::pair{w, h});
  }
}

TEST_CASE("final resize normalizes every pair to the target scale") {
  DegradeConfig c;
  c.target_scale = 4;
  const GrayImage art = fixtures::line_art(512, 512);
  std::mt19937_64 rng(0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GrayImage out = degrade::degrade(art, sample_recipe(seed, c));
    CHECK(out.width() == 128);
    CHECK(out.height() == 128);
  }
}

TEST_CASE("generate_pairs writes pairs and a manifest that regenerates them") {
  TempDir hq, out;
  io::write_png(hq.path / "a.png", fixtures::line_art(240, 200));
  io::write_png(hq.path / "b.png", fixtures::line_art(200, 260, 12));
  io::write_png(hq.path / "c.png", fixtures::line_art(256, 256, 20));
  DegradeConfig c;
  c.max_orders = 3;
  const DatasetManifest m = generate_pairs(hq.path, out.path, 99, 2, c);
  REQUIRE(m.pairs.size() == 6);
  for (const PairRecord& p : m.pairs) {
    CHECK(fs::exists(out.path / p.hq_file));
    CHECK(fs::exists(out.path / p.lq_file));
    const GrayImage lq = io::read_gray(out.path / p.lq_file);
    CHECK(lq.width() == p.lq_width);
    CHECK(lq.height() == p.lq_height);
    CHECK(std::pair{p.lq_width, p.lq_height} == degraded_size(p.hq_width, p.hq_height, p.recipe));
    CHECK(p.seed == derive_seed(99, p.source, p.seed_index));
  }
  const auto text = io::read_text(out.path / "manifest.json");
  const DatasetManifest parsed = json::parse(text).get<DatasetManifest>();
  CHECK(parsed == m);

  TempDir again;
  regenerate(parsed, hq.path, again.path);
  for (const PairRecord& p : m.pairs) {
    CHECK(io::read_text(again.path / p.lq_file) == io::read_text(out.path / p.lq_file));
  }

  TempDir second;
  generate_pairs(hq.path, second.path, 99, 2, c);
  CHECK(io::read_text(second.path / "manifest.json") == text);
}

TEST_CASE("generate_pairs surfaces I/O errors with the file name") {
  TempDir hq, out;
  io::write_text(hq.path / "broken.png", "not an image");
  try {
    generate_pairs(hq.path, out.path, 1, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("broken.png") != std::string::npos);
  }
}
