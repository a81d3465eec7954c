#pragma once

#include "qef/links.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace qef {

// Location/scale pair (c_m, d_m) under which m G(c_m + d_m z) approaches
// exp_q(z), together with the tail index q it targets.
struct NormalizingTriple {
  double q;
  double c;  // c_m
  double d;  // d_m > 0
  std::int64_t m;
};

// The explicit triple for each family at sample size m >= 2:
//   logistic / gumbel-min : (1, -log m, 1)
//   standard normal       : (1, -sqrt(2 log m) +
//                               (log log m + log 4 pi)/(2 sqrt(2 log m)),
//                               (2 log m)^{-1/2})
//   cauchy                : (2, -m/pi, m/pi)
//   uniform[-1,1]         : (0, -1 + 2/m, 2/m)            [exact, zero residual]
//   t-logistic, t = 1     : as logistic
//   t-logistic, t = 0     : as uniform
//   t-logistic, t > 1     : (t, -m^{t-1}/(t-1), m^{t-1})
//   t-logistic, 0 < t < 1 : (t, z* + m^{-(1-t)}/(1-t), m^{-(1-t)}),
//                           z* = -1/(1-t)
//   t-logistic, t < 0     : (0, z* + 1/m, 1/m)
// The t-logistic triples come from the lower-tail expansions of G_t.
NormalizingTriple normalizing_sequence(const LinkFamily& family,
                                       std::int64_t m);

// Residuals r(z) = m G(c_m + d_m z) - exp_q(z); the z grid must lie where
// exp_q is finite.
Eigen::VectorXd verify_gev(const LinkFamily& family, std::int64_t m,
                           const Eigen::VectorXd& z_grid);

}  // namespace qef
