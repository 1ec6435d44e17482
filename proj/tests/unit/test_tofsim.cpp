#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/raster_io.hpp"
#include "tofmpi/rng.hpp"
#include "tofmpi/scene.hpp"
#include "tofmpi/tofsim.hpp"

using namespace tofmpi;
using std::numbers::pi;

namespace {

CornerScene RightCorner(int res) {
  CornerScene sc;
  sc.alpha = pi / 2;
  sc.theta = pi / 4;
  sc.phi = pi / 2;
  sc.materials = {BuiltinMaterials()[0].material, BuiltinMaterials()[0].material};
  sc.resolution = {res, res};
  sc.seed = 11;
  return sc;
}

double Depth(std::vector<PhasorReturn> r, const ToFConfig& cfg = {}) {
  return CombinePhasors(r, cfg).depth;
}

}  // namespace

TEST_CASE("single and coherent phasors") {
  const ToFConfig cfg;
  CHECK(cfg.UnambiguousRange() == doctest::Approx(7.4948114500).epsilon(1e-10));
  for (double d : {0.1, 1.0, 3.0, 7.4}) {
    const PhasorSum s = CombinePhasors(std::vector<PhasorReturn>{{1.0, d}}, cfg);
    CHECK(std::abs(s.depth - d) < 1e-12);
    CHECK(s.amplitude == doctest::Approx(1.0).epsilon(1e-15));
  }
  const double d = 9.0;
  CHECK(std::abs(Depth({{1.0, d}}) - std::fmod(d, cfg.UnambiguousRange())) < 1e-12);

  const PhasorSum two = CombinePhasors(std::vector<PhasorReturn>{{1.0, 3.0}, {1.0, 3.0}}, cfg);
  CHECK(std::abs(two.depth - 3.0) < 1e-12);
  CHECK(two.amplitude == doctest::Approx(2.0).epsilon(1e-15));

  const double mixed = Depth({{1.0, 3.0}, {0.2, 4.0}});
  CHECK(std::abs(mixed - oracle::PhasorDepth({{1.0, 3.0}, {0.2, 4.0}}, 2e7)) < 1e-12);
  CHECK(mixed > 3.0);
  CHECK(mixed < 4.0);
}

TEST_CASE("phasor sums match the complex oracle") {
  Rng rng(21);
  const ToFConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(rng.UniformIndex(8));
    std::vector<PhasorReturn> r;
    std::vector<std::pair<double, double>> o;
    for (int k = 0; k < n; ++k) {
      const double a = 1.0 - rng.Uniform01();
      const double d = rng.Uniform(0.1, 7.4);
      r.push_back({a, d});
      o.emplace_back(a, d);
    }
    const double got = Depth(r, cfg);
    const double want = oracle::PhasorDepth(o, cfg.modulation_frequency);
    const double range = cfg.UnambiguousRange();
    // Compare on the circle so a result at 0 and one just below the range agree.
    const double diff = std::abs(got - want);
    CHECK(std::min(diff, range - diff) < 1e-12);
    CHECK(got >= 0.0);
    CHECK(got < range);
  }
}

TEST_CASE("phase wrap and zero signal") {
  const ToFConfig cfg;
  const double range = cfg.UnambiguousRange();
  for (double d : {0.5, 2.0, 6.0}) {
    CHECK(std::abs(Depth({{1.0, d + range}}) - Depth({{1.0, d}})) < 1e-9);
  }
  CHECK_THROWS_AS(Depth({}), Error);
  try {
    Depth({{0.0, 1.0}, {0.0, 2.0}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroSignal);
  }
}

TEST_CASE("longer secondary returns push depth monotonically") {
  const ToFConfig cfg;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double d0 = rng.Uniform(1.0, 4.0);
    const double d1 = d0 + rng.Uniform(0.01, cfg.UnambiguousRange() / 2 - 0.01);
    double prev = Depth({{1.0, d0}});
    for (double a = 0.05; a < 3.0; a += 0.05) {
      const double cur = Depth({{1.0, d0}, {a, d1}});
      CHECK(cur >= prev - 1e-12);
      CHECK(cur <= d1 + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("config validation") {
  ToFConfig cfg;
  cfg.modulation_frequency = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = {};
  cfg.bounce_samples = 0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = {};
  cfg.modulation_frequency = 3e4;
  CHECK(cfg.UnambiguousRange() == doctest::Approx(4996.54).epsilon(1e-5));
}

TEST_CASE("direct-only renders are exact") {
  ToFConfig cfg;
  cfg.multipath_enabled = false;
  for (std::uint64_t s = 0; s < 4; ++s) {
    CornerScene sc = SampleSimpleScene(s);
    sc.resolution = {64, 48};
    const FrameSet f = Render(sc, cfg);
    CHECK_NOTHROW(f.CheckShapes());
    CHECK(f.width() == 64);
    CHECK(f.height() == 48);
    double worst = 0.0;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        if (!f.valid(x, y)) continue;
        worst = std::max(worst, std::abs(f.depth(x, y) - f.ground_truth(x, y)));
        CHECK(f.amplitude(x, y) == doctest::Approx(f.intensity(x, y)).epsilon(1e-12));
      }
    CHECK(worst < 1e-9);
  }

  const FrameSet c = Render(RightCorner(41), cfg);
  CHECK(std::abs(c.ground_truth(20, 20) - 3.0) < 1e-9);
  CHECK(std::abs(c.depth(20, 20) - 3.0) < 1e-9);
}

TEST_CASE("right-angle concrete corner is biased long") {
  const CornerScene sc = RightCorner(100);
  const FrameSet f = Render(sc, ToFConfig{});
  double sum = 0.0;
  std::size_t n = 0, below = 0;
  double max_gt = 0.0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) {
      if (!f.valid(x, y)) continue;
      CHECK(f.ground_truth(x, y) > 0.0);
      CHECK(f.depth(x, y) >= 0.0);
      CHECK(f.depth(x, y) < ToFConfig{}.UnambiguousRange());
      CHECK(f.intensity(x, y) >= f.amplitude(x, y) * (1 - 1e-12));
      sum += std::abs(f.depth(x, y) - f.ground_truth(x, y)) / f.ground_truth(x, y);
      if (f.depth(x, y) < f.ground_truth(x, y) - 1e-9) ++below;
      max_gt = std::max(max_gt, f.ground_truth(x, y));
      ++n;
    }
  REQUIRE(n > 0);
  const double mean = sum / static_cast<double>(n);
  MESSAGE("mean RPE " << mean << ", max ground truth " << max_gt);
  CHECK(mean >= 0.05);
  CHECK(mean <= 0.5);
  CHECK(below == 0);
  CHECK(max_gt < 3.7);
}

TEST_CASE("render determinism and noise") {
  CornerScene sc = SampleSimpleScene(8);
  sc.resolution = {32, 32};
  ToFConfig cfg;
  cfg.bounce_samples = 16;
  const FrameSet a = Render(sc, cfg);
  cfg.threads = 1;
  const FrameSet b = Render(sc, cfg);
  CHECK(a.depth == b.depth);
  CHECK(a.amplitude == b.amplitude);
  CHECK(a.intensity == b.intensity);
  CHECK(a.valid == b.valid);

  cfg.noise_stddev = 0.01;
  const FrameSet n1 = Render(sc, cfg);
  const FrameSet n2 = Render(sc, cfg);
  CHECK(n1.depth == n2.depth);
  CHECK(n1.ground_truth == a.ground_truth);
  double mean = 0.0, sq = 0.0;
  int count = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      if (!a.valid(x, y)) continue;
      const double e = n1.depth(x, y) - a.depth(x, y);
      mean += e;
      sq += e * e;
      ++count;
    }
  mean /= count;
  const double sd = std::sqrt(sq / count - mean * mean);
  CHECK(std::abs(mean) < 0.002);
  CHECK(sd == doctest::Approx(0.01).epsilon(0.15));
}

TEST_CASE("rays that miss every plane are masked out") {
  CornerScene sc = RightCorner(48);
  sc.theta = 1.3;  // grazing view, the far edge of the floor is inside the frame
  sc.camera_distance = 6.0;
  ToFConfig cfg;
  cfg.bounce_samples = 8;
  const FrameSet f = Render(sc, cfg);
  std::size_t invalid = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      if (!f.valid(x, y)) {
        ++invalid;
        CHECK(f.depth(x, y) == 0.0);
        CHECK(f.amplitude(x, y) == 0.0);
        CHECK(f.intensity(x, y) == 0.0);
      }
  CHECK(invalid > 0);
}

TEST_CASE("three-plane corners render") {
  const CornerScene sc = SampleChallengingScene(4, CornerKind::kThreePlane);
  CornerScene small = sc;
  small.resolution = {24, 24};
  ToFConfig cfg;
  cfg.bounce_samples = 12;
  const FrameSet f = Render(small, cfg);
  std::size_t valid = 0;
  for (auto v : f.valid.values()) valid += v;
  CHECK(valid > 0);
}

TEST_CASE("TFIM byte layout") {
  TfimImage img{2, 1, 2, {1.0f, -2.0f, 0.5f, 3.0f}};
  const auto bytes = EncodeTfim(img);
  const std::vector<std::uint8_t> head = {'T', 'F', 'I', 'M', 1, 0, 0, 0, 2, 0, 0, 0,
                                          1,   0,   0,   0,   2, 0, 0, 0};
  REQUIRE(bytes.size() == 20 + 16);
  CHECK(std::equal(head.begin(), head.end(), bytes.begin()));
  // 1.0f = 0x3F800000, little-endian.
  CHECK(bytes[20] == 0x00);
  CHECK(bytes[22] == 0x80);
  CHECK(bytes[23] == 0x3F);
  // -2.0f = 0xC0000000.
  CHECK(bytes[27] == 0xC0);
  const TfimImage back = DecodeTfim(bytes);
  CHECK(back.data == img.data);
  CHECK(back.width == 2);
  CHECK(back.channels == 2);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(DecodeTfim(bad), Error);
  bad = bytes;
  bad[4] = 2;
  try {
    DecodeTfim(bad);
    FAIL("expected version error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVersionMismatch);
  }
  bad = bytes;
  bad.pop_back();
  try {
    DecodeTfim(bad);
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTruncatedFile);
  }
}

TEST_CASE("mask bits are packed least significant first") {
  Mask m(3, 3);
  m(0, 0) = 1;
  m(2, 0) = 1;
  m(2, 2) = 1;  // pixel 8 -> bit 0 of byte 1
  const auto bytes = EncodeMask(m);
  REQUIRE(bytes.size() == 12 + 2);
  CHECK(bytes[0] == 'T');
  CHECK(bytes[3] == 'K');
  CHECK(bytes[4] == 3);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 0b101);
  CHECK(bytes[13] == 0b1);
  CHECK(DecodeMask(bytes) == m);
}

TEST_CASE("frame sets survive the file round trip") {
  CornerScene sc = SampleSimpleScene(2);
  sc.resolution = {16, 12};
  ToFConfig cfg;
  cfg.bounce_samples = 4;
  const FrameSet f = Render(sc, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "tofmpi_tofsim_io";
  std::filesystem::create_directories(dir);
  WriteFrameSet(dir / "f.tfim", f);
  CHECK(std::filesystem::exists(dir / "f.tfmk"));
  const FrameSet g = ReadFrameSet(dir / "f.tfim");
  CHECK(g.valid == f.valid);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) {
      CHECK(g.depth(x, y) == static_cast<double>(static_cast<float>(f.depth(x, y))));
      CHECK(g.ground_truth(x, y) == static_cast<double>(static_cast<float>(f.ground_truth(x, y))));
    }
  std::filesystem::remove_all(dir);
}
