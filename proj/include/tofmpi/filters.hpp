#pragma once

#include <array>
#include <vector>

#include "tofmpi/raster.hpp"

namespace tofmpi {

// Square correlation kernel, row-major; weight(dx, dy) multiplies
// img(x + dx, y + dy) for dx, dy in [-radius, radius].
struct Kernel {
  int size = 0;
  std::vector<double> weights;

  int radius() const { return size / 2; }
  double operator()(int dx, int dy) const {
    return weights[static_cast<std::size_t>(dy + radius()) * size + (dx + radius())];
  }
};

// Correlation with edge replication. Output has the input's shape.
Raster Correlate(const Raster& img, const Kernel& kernel);
// Separable correlation: horizontal pass with `row`, vertical with `col`.
Raster CorrelateSeparable(const Raster& img, const std::vector<double>& row,
                          const std::vector<double>& col);

// 1-D aperture kernels (binomial smoothing, first and second derivative).
std::vector<double> SmoothingKernel1D(int size);
std::vector<double> DerivativeKernel1D(int size, int order);

Kernel LaplacianKernel(int ksize);
Kernel SobelKernel(int ksize, bool x_direction);

inline constexpr int kGaborSize = 13;
inline constexpr double kGaborWavelength = 8.0;
inline constexpr double kGaborSigma = 4.0;
inline constexpr double kGaborAspect = 0.5;
inline constexpr double kGaborPhase = 0.0;
inline constexpr std::array<double, 4> kGaborOrientationsDeg = {0.0, 45.0, 90.0, 135.0};

// Real Gabor kernel, mean-subtracted so that it sums to zero.
Kernel GaborKernel(double orientation_rad);

// Laplacian with aperture 3 ([0,1,0; 1,-4,1; 0,1,0]), 5 or 7 (sum of
// separable second-derivative Sobel kernels). Throws kBadKernelSize.
Raster Laplacian(const Raster& img, int ksize);

// Canny edge map in {0, 1}: Sobel gradients at the aperture, non-maximum
// suppression and hysteresis with thresholds at the 70th / 90th percentile
// of the image's gradient magnitude. Throws kBadKernelSize.
Raster Canny(const Raster& img, int aperture);

// Responses at 0, 45, 90 and 135 degrees.
std::array<Raster, 4> GaborBank(const Raster& img);

struct Gradients {
  Raster grad_x;
  Raster grad_y;
  Raster grad_xy;    // Sobel-y applied to grad_x
  Raster magnitude;
  Raster angle;      // atan2(gy, gx) in (-pi, pi], 0 where both vanish
};

Gradients ComputeGradients(const Raster& img);

// 8-neighbour radius-1 LBP; bit k set iff neighbour k >= centre, neighbours
// clockwise from east (E, SE, S, SW, W, NW, N, NE), edge-replicated borders.
Raster Lbp(const Raster& img);

}  // namespace tofmpi
