#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/filters.hpp"
#include "tofmpi/rng.hpp"

using namespace tofmpi;
using std::numbers::pi;

namespace {

Raster RandomImage(Rng& rng, int w, int h) {
  Raster r(w, h);
  for (double& v : r.values()) v = rng.Uniform(-1.0, 1.0);
  return r;
}

oracle::Image ToOracle(const Raster& r) { return {r.width(), r.height(), r.values()}; }

double MaxDiff(const Raster& a, const oracle::Image& b) {
  REQUIRE(a.width() == b.w);
  REQUIRE(a.height() == b.h);
  double d = 0.0;
  for (std::size_t i = 0; i < b.v.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.v[i]));
  return d;
}

Raster Ramp(int w, int h) {
  Raster r(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) r(x, y) = x;
  return r;
}

}  // namespace

TEST_CASE("filters agree with direct correlation on random images") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 4 + static_cast<int>(rng.UniformIndex(17));
    const int h = 4 + static_cast<int>(rng.UniformIndex(17));
    const Raster img = RandomImage(rng, w, h);
    const oracle::Image o = ToOracle(img);
    for (int k : {3, 5, 7}) {
      CHECK(MaxDiff(Laplacian(img, k), oracle::Correlate(o, oracle::LaplacianKernel(k), k)) < 1e-6);
    }
    const auto bank = GaborBank(img);
    for (int i = 0; i < 4; ++i) {
      const auto kernel = oracle::GaborKernel(i * pi / 4);
      CHECK(MaxDiff(bank[i], oracle::Correlate(o, kernel, 13)) < 1e-6);
    }
    const Gradients g = ComputeGradients(img);
    const auto sx = oracle::Outer(oracle::FirstDerivative(3), oracle::Smooth(3));
    const auto sy = oracle::Outer(oracle::Smooth(3), oracle::FirstDerivative(3));
    const oracle::Image gx = oracle::Correlate(o, sx, 3);
    CHECK(MaxDiff(g.grad_x, gx) < 1e-6);
    CHECK(MaxDiff(g.grad_y, oracle::Correlate(o, sy, 3)) < 1e-6);
    CHECK(MaxDiff(g.grad_xy, oracle::Correlate(gx, sy, 3)) < 1e-6);
    CHECK(MaxDiff(Lbp(img), oracle::Lbp(o)) == 0.0);
  }
}

TEST_CASE("bad apertures") {
  const Raster img(8, 8, 1.0);
  for (int k : {0, 1, 2, 4, 9}) {
    CHECK_THROWS_AS(Laplacian(img, k), Error);
    try {
      Canny(img, k);
      FAIL("expected BadKernelSize");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBadKernelSize);
    }
  }
}

TEST_CASE("laplacian annihilates constants and ramps") {
  const Raster flat(20, 15, 2.5);
  const Raster ramp = Ramp(20, 15);
  for (int k : {3, 5, 7}) {
    const Raster lf = Laplacian(flat, k);
    for (double v : lf.values()) CHECK(v == 0.0);
    const Raster l = Laplacian(ramp, k);
    const int r = k / 2;
    for (int y = 0; y < 15; ++y)
      for (int x = r; x < 20 - r; ++x) CHECK(std::abs(l(x, y)) < 1e-12);
  }
}

TEST_CASE("gabor kernels have zero mean and the grating prefers 0 degrees") {
  for (double deg : kGaborOrientationsDeg) {
    const Kernel k = GaborKernel(deg * pi / 180);
    CHECK(k.size == 13);
    double sum = 0.0;
    for (double v : k.weights) sum += v;
    CHECK(std::abs(sum) < 1e-12);
  }
  for (const Raster& r : GaborBank(Raster(24, 24, 7.0)))
    for (double v : r.values()) CHECK(std::abs(v) < 1e-6);

  // Intensity varies along x with the tuned wavelength.
  Raster grating(48, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x) grating(x, y) = std::cos(2 * pi * x / kGaborWavelength);
  const auto bank = GaborBank(grating);
  auto energy = [](const Raster& r) {
    double e = 0.0;
    for (int y = 8; y < 40; ++y)
      for (int x = 8; x < 40; ++x) e += r(x, y) * r(x, y);
    return e;
  };
  CHECK(energy(bank[0]) > 10 * energy(bank[3]));
  CHECK(energy(bank[0]) > 10 * energy(bank[2]));
}

TEST_CASE("gradients of ramps and constants") {
  const Gradients g = ComputeGradients(Ramp(12, 10));
  for (int y = 0; y < 10; ++y)
    for (int x = 1; x < 11; ++x) {
      CHECK(g.grad_x(x, y) == doctest::Approx(8.0));
      CHECK(std::abs(g.grad_y(x, y)) < 1e-12);
      CHECK(std::abs(g.angle(x, y)) < 1e-12);
    }
  const Gradients c = ComputeGradients(Raster(9, 9, 4.0));
  for (std::size_t i = 0; i < 81; ++i) {
    CHECK(c.magnitude.values()[i] == 0.0);
    CHECK(c.angle.values()[i] == 0.0);
  }

  Rng rng(4);
  const Gradients r = ComputeGradients(RandomImage(rng, 15, 11));
  for (std::size_t i = 0; i < r.magnitude.size(); ++i) {
    const double gx = r.grad_x.values()[i], gy = r.grad_y.values()[i];
    CHECK(std::abs(r.magnitude.values()[i] * r.magnitude.values()[i] - (gx * gx + gy * gy)) < 1e-9);
    const double a = r.angle.values()[i];
    CHECK(a > -pi);
    CHECK(a <= pi);
  }

  // A pure negative-x gradient lands on +pi, never -pi.
  Raster neg(6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) neg(x, y) = -x;
  CHECK(ComputeGradients(neg).angle(3, 3) == pi);
}

TEST_CASE("lbp conventions") {
  const Raster flat = Lbp(Raster(5, 5, 1.0));
  for (double v : flat.values()) CHECK(v == 255.0);
  Raster spike(3, 3, 0.0);
  spike(1, 1) = 5.0;
  CHECK(Lbp(spike)(1, 1) == 0.0);
  // Only the east neighbour is brighter.
  Raster east(3, 3, 0.0);
  east(1, 1) = 1.0;
  east(2, 1) = 2.0;
  CHECK(Lbp(east)(1, 1) == 1.0);
  // North-east is bit 7.
  Raster ne(3, 3, 0.0);
  ne(1, 1) = 1.0;
  ne(2, 0) = 2.0;
  CHECK(Lbp(ne)(1, 1) == 128.0);
}

TEST_CASE("canny on a vertical step") {
  Raster step(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) step(x, y) = x < 16 ? 0.0 : 1.0;
  for (int k : {3, 5, 7}) {
    const Raster e = Canny(step, k);
    int edge_column = -1;
    for (int x = 0; x < 32; ++x) {
      int count = 0;
      for (int y = 0; y < 32; ++y) count += e(x, y) != 0.0;
      if (count == 0) continue;
      CHECK(count == 32);
      CHECK(edge_column == -1);
      edge_column = x;
    }
    CHECK((edge_column == 15 || edge_column == 16));
  }
  const Raster none = Canny(Raster(16, 16, 3.0), 3);
  for (double v : none.values()) CHECK(v == 0.0);

  Rng rng(9);
  for (int k : {3, 5, 7}) {
    const Raster e = Canny(RandomImage(rng, 20, 20), k);
    for (double v : e.values()) CHECK((v == 0.0 || v == 1.0));
  }
}

TEST_CASE("filters commute with translation away from borders") {
  Rng rng(12);
  const int w = 40, h = 30;
  const Raster img = RandomImage(rng, w, h);
  Raster shifted(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) shifted(x, y) = img.Clamped(x - 1, y);

  auto check = [&](const Raster& a, const Raster& b, int margin) {
    double d = 0.0;
    for (int y = margin; y < h - margin; ++y)
      for (int x = margin + 1; x < w - margin; ++x) d = std::max(d, std::abs(b(x, y) - a(x - 1, y)));
    CHECK(d < 1e-9);
  };
  for (int k : {3, 5, 7}) check(Laplacian(img, k), Laplacian(shifted, k), k / 2);
  const auto g0 = GaborBank(img), g1 = GaborBank(shifted);
  for (int i = 0; i < 4; ++i) check(g0[i], g1[i], 6);
  const Gradients a = ComputeGradients(img), b = ComputeGradients(shifted);
  check(a.grad_x, b.grad_x, 1);
  check(a.grad_xy, b.grad_xy, 2);
  check(a.angle, b.angle, 1);
  check(Lbp(img), Lbp(shifted), 1);
}

TEST_CASE("outputs keep the input shape") {
  const Raster img(11, 7, 0.3);
  CHECK(Laplacian(img, 5).SameShape(img));
  CHECK(Canny(img, 7).SameShape(img));
  CHECK(Lbp(img).SameShape(img));
  CHECK(GaborBank(img)[1].SameShape(img));
  CHECK(ComputeGradients(img).angle.SameShape(img));
}
