#include "tofmpi/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace tofmpi {

double Rng::Normal() {
  // 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform01();
  const double u2 = Uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::uint32_t> Rng::Permutation(std::uint32_t n) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) {
    const auto j = static_cast<std::uint32_t>(UniformIndex(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace tofmpi
