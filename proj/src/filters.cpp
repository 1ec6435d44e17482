#include "tofmpi/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tofmpi/error.hpp"

namespace tofmpi {

namespace {

void CheckAperture(int ksize) {
  if (ksize != 3 && ksize != 5 && ksize != 7) {
    throw Error(ErrorCode::kBadKernelSize, "aperture must be 3, 5 or 7, got " + std::to_string(ksize));
  }
}

std::vector<double> Convolve1D(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Kernel OuterProduct(const std::vector<double>& row, const std::vector<double>& col) {
  Kernel k;
  k.size = static_cast<int>(row.size());
  k.weights.resize(row.size() * col.size());
  for (std::size_t y = 0; y < col.size(); ++y)
    for (std::size_t x = 0; x < row.size(); ++x) k.weights[y * row.size() + x] = col[y] * row[x];
  return k;
}

double Percentile(std::vector<double> values, double p) {
  const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
  return values[idx];
}

}  // namespace

Raster Correlate(const Raster& img, const Kernel& kernel) {
  const int r = kernel.radius();
  Raster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) acc += kernel(dx, dy) * img.Clamped(x + dx, y + dy);
      out(x, y) = acc;
    }
  }
  return out;
}

Raster CorrelateSeparable(const Raster& img, const std::vector<double>& row,
                          const std::vector<double>& col) {
  const int rx = static_cast<int>(row.size()) / 2;
  const int ry = static_cast<int>(col.size()) / 2;
  Raster tmp(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int dx = -rx; dx <= rx; ++dx) acc += row[dx + rx] * img.Clamped(x + dx, y);
      tmp(x, y) = acc;
    }
  }
  Raster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int dy = -ry; dy <= ry; ++dy) acc += col[dy + ry] * tmp.Clamped(x, y + dy);
      out(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> SmoothingKernel1D(int size) {
  std::vector<double> k = {1.0};
  for (int i = 1; i < size; ++i) k = Convolve1D(k, {1.0, 1.0});
  return k;
}

std::vector<double> DerivativeKernel1D(int size, int order) {
  const std::vector<double> base = order == 1 ? std::vector<double>{-1.0, 0.0, 1.0}
                                              : std::vector<double>{1.0, -2.0, 1.0};
  return size == 3 ? base : Convolve1D(SmoothingKernel1D(size - 2), base);
}

Kernel LaplacianKernel(int ksize) {
  CheckAperture(ksize);
  if (ksize == 3) return Kernel{3, {0, 1, 0, 1, -4, 1, 0, 1, 0}};
  const auto smooth = SmoothingKernel1D(ksize);
  const auto second = DerivativeKernel1D(ksize, 2);
  Kernel dxx = OuterProduct(second, smooth);
  const Kernel dyy = OuterProduct(smooth, second);
  for (std::size_t i = 0; i < dxx.weights.size(); ++i) dxx.weights[i] += dyy.weights[i];
  return dxx;
}

Kernel SobelKernel(int ksize, bool x_direction) {
  CheckAperture(ksize);
  const auto smooth = SmoothingKernel1D(ksize);
  const auto first = DerivativeKernel1D(ksize, 1);
  return x_direction ? OuterProduct(first, smooth) : OuterProduct(smooth, first);
}

Kernel GaborKernel(double orientation_rad) {
  const int r = kGaborSize / 2;
  const double c = std::cos(orientation_rad);
  const double s = std::sin(orientation_rad);
  Kernel k{kGaborSize, std::vector<double>(kGaborSize * kGaborSize)};
  double mean = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double xr = dx * c + dy * s;
      const double yr = -dx * s + dy * c;
      const double envelope = std::exp(-(xr * xr + kGaborAspect * kGaborAspect * yr * yr) /
                                       (2.0 * kGaborSigma * kGaborSigma));
      const double w = envelope * std::cos(2.0 * std::numbers::pi * xr / kGaborWavelength + kGaborPhase);
      k.weights[(dy + r) * kGaborSize + (dx + r)] = w;
      mean += w;
    }
  }
  mean /= static_cast<double>(k.weights.size());
  for (double& w : k.weights) w -= mean;
  return k;
}

Raster Laplacian(const Raster& img, int ksize) {
  CheckAperture(ksize);
  if (ksize == 3) return Correlate(img, LaplacianKernel(3));
  const auto smooth = SmoothingKernel1D(ksize);
  const auto second = DerivativeKernel1D(ksize, 2);
  Raster out = CorrelateSeparable(img, second, smooth);
  const Raster dyy = CorrelateSeparable(img, smooth, second);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += dyy.values()[i];
  return out;
}

Raster Canny(const Raster& img, int aperture) {
  CheckAperture(aperture);
  const int w = img.width();
  const int h = img.height();
  const auto smooth = SmoothingKernel1D(aperture);
  const auto first = DerivativeKernel1D(aperture, 1);
  const Raster gx = CorrelateSeparable(img, first, smooth);
  const Raster gy = CorrelateSeparable(img, smooth, first);

  Raster mag(w, h);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    mag.values()[i] = std::hypot(gx.values()[i], gy.values()[i]);
  }
  Raster edges(w, h);
  if (mag.empty()) return edges;
  const double low = Percentile(mag.values(), 0.70);
  const double high = Percentile(mag.values(), 0.90);

  auto mag_at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag(x, y);
  };

  // 0 = suppressed, 1 = weak, 2 = strong.
  Grid<std::uint8_t> label(w, h);
  constexpr double kTan22 = 0.41421356237309503;  // tan(22.5 deg)
  constexpr double kTan67 = 2.414213562373095;    // tan(67.5 deg)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (!(m > low)) continue;
      const double ax = std::abs(gx(x, y));
      const double ay = std::abs(gy(x, y));
      double before = 0.0;
      double after = 0.0;
      if (ay <= kTan22 * ax) {
        before = mag_at(x - 1, y);
        after = mag_at(x + 1, y);
      } else if (ay >= kTan67 * ax) {
        before = mag_at(x, y - 1);
        after = mag_at(x, y + 1);
      } else if ((gx(x, y) > 0) == (gy(x, y) > 0)) {
        before = mag_at(x - 1, y - 1);
        after = mag_at(x + 1, y + 1);
      } else {
        before = mag_at(x + 1, y - 1);
        after = mag_at(x - 1, y + 1);
      }
      if (m > before && m >= after) label(x, y) = m > high ? 2 : 1;
    }
  }

  // Hysteresis: grow strong pixels through 8-connected weak ones.
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label(x, y) == 2) {
        edges(x, y) = 1.0;
        stack.emplace_back(x, y);
      }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (label(nx, ny) == 1 && edges(nx, ny) == 0.0) {
          edges(nx, ny) = 1.0;
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

std::array<Raster, 4> GaborBank(const Raster& img) {
  std::array<Raster, 4> out;
  for (std::size_t i = 0; i < kGaborOrientationsDeg.size(); ++i) {
    out[i] = Correlate(img, GaborKernel(kGaborOrientationsDeg[i] * std::numbers::pi / 180.0));
  }
  return out;
}

Gradients ComputeGradients(const Raster& img) {
  const auto smooth = SmoothingKernel1D(3);
  const auto first = DerivativeKernel1D(3, 1);
  Gradients g;
  g.grad_x = CorrelateSeparable(img, first, smooth);
  g.grad_y = CorrelateSeparable(img, smooth, first);
  g.grad_xy = CorrelateSeparable(g.grad_x, smooth, first);
  g.magnitude = Raster(img.width(), img.height());
  g.angle = Raster(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double gx = g.grad_x.values()[i];
    const double gy = g.grad_y.values()[i];
    g.magnitude.values()[i] = std::sqrt(gx * gx + gy * gy);
    double angle = (gx == 0.0 && gy == 0.0) ? 0.0 : std::atan2(gy, gx);
    if (angle <= -std::numbers::pi) angle = std::numbers::pi;
    g.angle.values()[i] = angle;
  }
  return g;
}

Raster Lbp(const Raster& img) {
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  Raster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double centre = img(x, y);
      int code = 0;
      for (int k = 0; k < 8; ++k) {
        if (img.Clamped(x + kDx[k], y + kDy[k]) >= centre) code |= 1 << k;
      }
      out(x, y) = code;
    }
  }
  return out;
}

}  // namespace tofmpi
