#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code they are checking.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Row-major image, (x, y) = (column, row).
struct Image {
  int w = 0, h = 0;
  std::vector<double> v;
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  double clamped(int x, int y) const {
    return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  }
};

// Direct O(n^2 k^2) correlation with edge replication; kernel is k x k
// row-major with weight(dx, dy) at [(dy + r) * k + (dx + r)].
inline Image Correlate(const Image& img, const std::vector<double>& kernel, int k) {
  const int r = k / 2;
  Image out{img.w, img.h, std::vector<double>(img.v.size())};
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += kernel[(dy + r) * k + (dx + r)] * img.clamped(x + dx, y + dy);
      out.v[static_cast<std::size_t>(y) * img.w + x] = acc;
    }
  return out;
}

inline std::vector<double> Outer(const std::vector<double>& row, const std::vector<double>& col) {
  std::vector<double> k(row.size() * col.size());
  for (std::size_t y = 0; y < col.size(); ++y)
    for (std::size_t x = 0; x < row.size(); ++x) k[y * row.size() + x] = col[y] * row[x];
  return k;
}

// Aperture kernels written out by hand.
inline std::vector<double> Smooth(int k) {
  switch (k) {
    case 3: return {1, 2, 1};
    case 5: return {1, 4, 6, 4, 1};
    default: return {1, 6, 15, 20, 15, 6, 1};
  }
}
inline std::vector<double> FirstDerivative(int k) {
  switch (k) {
    case 3: return {-1, 0, 1};
    case 5: return {-1, -2, 0, 2, 1};
    default: return {-1, -4, -5, 0, 5, 4, 1};
  }
}
inline std::vector<double> SecondDerivative(int k) {
  switch (k) {
    case 3: return {1, -2, 1};
    case 5: return {1, 0, -2, 0, 1};
    default: return {1, 2, -1, -4, -1, 2, 1};
  }
}

inline std::vector<double> LaplacianKernel(int k) {
  if (k == 3) return {0, 1, 0, 1, -4, 1, 0, 1, 0};
  auto a = Outer(SecondDerivative(k), Smooth(k));
  const auto b = Outer(Smooth(k), SecondDerivative(k));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline std::vector<double> GaborKernel(double theta, int size = 13, double lambda = 8.0,
                                       double sigma = 4.0, double gamma = 0.5) {
  const int r = size / 2;
  std::vector<double> k;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double xr = dx * std::cos(theta) + dy * std::sin(theta);
      const double yr = -dx * std::sin(theta) + dy * std::cos(theta);
      k.push_back(std::exp(-(xr * xr + gamma * gamma * yr * yr) / (2 * sigma * sigma)) *
                  std::cos(2 * std::numbers::pi * xr / lambda));
    }
  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  for (double& v : k) v -= mean;
  return k;
}

// Pixel-by-pixel LBP: neighbours E, SE, S, SW, W, NW, N, NE -> bits 0..7.
inline Image Lbp(const Image& img) {
  const int nx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int ny[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  Image out{img.w, img.h, std::vector<double>(img.v.size())};
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      int code = 0;
      for (int k = 0; k < 8; ++k)
        if (img.clamped(x + nx[k], y + ny[k]) >= img.at(x, y)) code += 1 << k;
      out.v[static_cast<std::size_t>(y) * img.w + x] = code;
    }
  return out;
}

// Decoded depth of a set of (amplitude, distance) returns by explicit
// complex summation.
inline double PhasorDepth(const std::vector<std::pair<double, double>>& returns, double fm) {
  const double c = 299792458.0;
  std::complex<double> z = 0.0;
  for (const auto& [a, d] : returns) {
    const double phase = 4.0 * std::numbers::pi * fm * d / c;
    z += std::complex<double>(a * std::cos(phase), a * std::sin(phase));
  }
  double phase = std::atan2(z.imag(), z.real());
  if (phase < 0) phase += 2.0 * std::numbers::pi;
  return phase * c / (4.0 * std::numbers::pi * fm);
}

// Brute-force CART: at every node, every feature and every midpoint between
// consecutive distinct values is scored from scratch.
struct CartNode {
  bool leaf = true;
  double value = 0.0;
  int feature = -1;
  double threshold = 0.0;
  std::unique_ptr<CartNode> left, right;
};

struct CartData {
  std::size_t n = 0, f = 0;
  std::vector<double> x;  // row-major
  std::vector<double> y;
  double at(std::size_t r, std::size_t c) const { return x[r * f + c]; }
};

inline std::unique_ptr<CartNode> BuildCart(const CartData& d, const std::vector<std::size_t>& idx,
                                           int depth, int max_depth, int min_split) {
  auto node = std::make_unique<CartNode>();
  double sum = 0.0, lo = INFINITY, hi = -INFINITY;
  for (auto r : idx) {
    sum += d.y[r];
    lo = std::min(lo, d.y[r]);
    hi = std::max(hi, d.y[r]);
  }
  const double n = static_cast<double>(idx.size());
  node->value = sum / n;
  if (depth >= max_depth || idx.size() < static_cast<std::size_t>(min_split) || hi - lo <= 1e-12) {
    return node;
  }
  double best = -INFINITY;
  int best_f = -1;
  double best_t = 0.0;
  for (std::size_t f = 0; f < d.f; ++f) {
    std::vector<double> vals;
    for (auto r : idx) vals.push_back(d.at(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      double t = vals[i] + (vals[i + 1] - vals[i]) / 2.0;
      if (!(t < vals[i + 1])) t = vals[i];
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (auto r : idx) {
        if (d.at(r, f) <= t) {
          sl += d.y[r];
          nl += 1;
        } else {
          sr += d.y[r];
          nr += 1;
        }
      }
      const double score = sl * sl / nl + sr * sr / nr;
      if (score > best) {
        best = score;
        best_f = static_cast<int>(f);
        best_t = t;
      }
    }
  }
  if (best_f < 0 || !(best - sum * sum / n > 0.0)) return node;
  std::vector<std::size_t> li, ri;
  for (auto r : idx) (d.at(r, best_f) <= best_t ? li : ri).push_back(r);
  node->leaf = false;
  node->feature = best_f;
  node->threshold = best_t;
  node->left = BuildCart(d, li, depth + 1, max_depth, min_split);
  node->right = BuildCart(d, ri, depth + 1, max_depth, min_split);
  return node;
}

inline double PredictCart(const CartNode& node, const double* x) {
  const CartNode* n = &node;
  while (!n->leaf) n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
  return n->value;
}

}  // namespace oracle
