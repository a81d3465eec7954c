#include "qef/evt.hpp"

#include "qef/errors.hpp"
#include "qef/qexp.hpp"

#include <cmath>
#include <stdexcept>

namespace qef {

namespace {

constexpr double kPi = 3.14159265358979323846;

NormalizingTriple uniform_triple(std::int64_t m) {
  // m G(-1 + 2(1+z)/m) = 1 + z exactly for -1 <= z <= m - 1
  return {0.0, -1.0 + 2.0 / static_cast<double>(m),
          2.0 / static_cast<double>(m), m};
}

}  // namespace

NormalizingTriple normalizing_sequence(const LinkFamily& family,
                                       std::int64_t m) {
  if (m < 2)
    throw std::invalid_argument("normalizing_sequence: m must be >= 2");
  const double md = static_cast<double>(m);
  switch (family.kind()) {
    case LinkKind::Logistic:
    case LinkKind::GumbelMin:
      return {1.0, -std::log(md), 1.0, m};
    case LinkKind::StandardNormal: {
      const double s = std::sqrt(2.0 * std::log(md));
      const double c =
          -s + (std::log(std::log(md)) + std::log(4.0 * kPi)) / (2.0 * s);
      return {1.0, c, 1.0 / s, m};
    }
    case LinkKind::Cauchy:
      return {2.0, -md / kPi, md / kPi, m};
    case LinkKind::Uniform:
      return uniform_triple(m);
    case LinkKind::TLogistic: {
      const double t = family.t();
      if (t == 1.0) return {1.0, -std::log(md), 1.0, m};
      if (t == 0.0) return uniform_triple(m);
      if (t > 1.0) {
        const double scale = std::pow(md, t - 1.0);
        return {t, -scale / (t - 1.0), scale, m};
      }
      const double z_star = -1.0 / (1.0 - t);
      if (t > 0.0) {
        const double scale = std::pow(md, -(1.0 - t));
        return {t, z_star + scale / (1.0 - t), scale, m};
      }
      return {0.0, z_star + 1.0 / md, 1.0 / md, m};
    }
  }
  throw std::logic_error("normalizing_sequence: unreachable");
}

Eigen::VectorXd verify_gev(const LinkFamily& family, std::int64_t m,
                           const Eigen::VectorXd& z_grid) {
  const NormalizingTriple triple = normalizing_sequence(family, m);
  Eigen::VectorXd residuals(z_grid.size());
  for (Eigen::Index i = 0; i < z_grid.size(); ++i) {
    const double z = z_grid[i];
    const double target = exp_q(z, triple.q);
    if (!std::isfinite(target))
      throw std::invalid_argument(
          "verify_gev: exp_q(z) infinite at z = " + std::to_string(z) +
          " for q = " + std::to_string(triple.q));
    residuals[i] =
        static_cast<double>(m) * family.cdf(triple.c + triple.d * z) - target;
  }
  return residuals;
}

}  // namespace qef
