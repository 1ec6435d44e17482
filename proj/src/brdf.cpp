#include "tofmpi/brdf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tofmpi/error.hpp"

namespace tofmpi {

double WardReflectance(const WardMaterial& material, const Eigen::Vector3d& normal,
                       const Eigen::Vector3d& incoming, const Eigen::Vector3d& outgoing,
                       double cos_i, double cos_o, WardNormalization normalization) {
  constexpr double kPi = std::numbers::pi;
  const double diffuse = material.kd / kPi;
  if (material.mu >= 1.0) return diffuse;

  const double sigma = std::max(material.sigma, kMinWardSigma);
  const double sigma2 = sigma * sigma;
  const Eigen::Vector3d half = incoming + outgoing;
  const double h_dot_n = half.dot(normal);
  const double h_dot_h = half.dot(half);
  // tan^2 of the half-vector angle, from the unnormalized half vector.
  const double tan2 = std::max(h_dot_h - h_dot_n * h_dot_n, 0.0) / (h_dot_n * h_dot_n);
  const double lobe = std::exp(-tan2 / sigma2);

  double specular = 0.0;
  switch (normalization) {
    case WardNormalization::kClassic:
      specular = lobe / (4.0 * kPi * sigma2 * std::sqrt(cos_i * cos_o));
      break;
    case WardNormalization::kBoundedAlbedo: {
      const double hn2 = h_dot_n * h_dot_n;
      specular = lobe * h_dot_h / (kPi * sigma2 * hn2 * hn2);
      break;
    }
  }
  return material.mu * diffuse + (1.0 - material.mu) * material.ks * specular;
}

double EvalBrdf(const WardMaterial& material, const Eigen::Vector3d& normal,
                const Eigen::Vector3d& incoming, const Eigen::Vector3d& outgoing,
                WardNormalization normalization) {
  const double cos_i = normal.dot(incoming);
  const double cos_o = normal.dot(outgoing);
  if (!(cos_i > 0.0) || !(cos_o > 0.0)) {
    throw Error(ErrorCode::kBelowHorizon, "direction at or below the surface");
  }
  return WardReflectance(material, normal, incoming, outgoing, cos_i, cos_o, normalization);
}

}  // namespace tofmpi
