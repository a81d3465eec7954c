#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace qef {

// Deformed (q-)exponential: exp_q(z) = [1 + (1-q) z]_+^{1/(1-q)}, with
// exp_1(z) = e^z and [0]_+^{-1} = +inf.  Total on the extended reals:
// for q > 1 it is +inf on z >= 1/(q-1); for q < 1 it is 0 on
// z <= -1/(1-q).  Convex iff q >= 0, nondecreasing for every q.

namespace detail {

// |(1-q) z| below this switches to the series for log1p(u)/u, which keeps
// exp_q continuous in q through q = 1 without cancellation.
inline constexpr double kQSeriesThreshold = 1e-4;

template <class Scalar>
Scalar log1p_over_u(Scalar u) {
  // log1p(u)/u = 1 - u/2 + u^2/3 - u^3/4 + u^4/5 + O(u^5)
  return Scalar(1) -
         u * (Scalar(1) / 2 -
              u * (Scalar(1) / 3 - u * (Scalar(1) / 4 - u * (Scalar(1) / 5))));
}

}  // namespace detail

// log(exp_q(z)) computed in log space; -inf where exp_q = 0, +inf where
// exp_q = +inf.
template <class Scalar>
Scalar ln_exp_q(Scalar z, Scalar q) {
  const Scalar one_minus_q = Scalar(1) - q;
  if (one_minus_q == Scalar(0)) return z;
  const Scalar u = one_minus_q * z;
  if (std::abs(u) < Scalar(detail::kQSeriesThreshold))
    return z * detail::log1p_over_u(u);
  if (u > Scalar(-1)) return std::log1p(u) / one_minus_q;
  // argument of [.]_+ is nonpositive
  return q < Scalar(1) ? -std::numeric_limits<Scalar>::infinity()
                       : std::numeric_limits<Scalar>::infinity();
}

template <class Scalar>
Scalar exp_q(Scalar z, Scalar q) {
  return std::exp(ln_exp_q(z, q));
}

// Inverse of exp_q on (0, inf): ln_q(y) = (y^{1-q} - 1)/(1-q), ln_1 = log.
template <class Scalar>
Scalar ln_q(Scalar y, Scalar q) {
  const Scalar one_minus_q = Scalar(1) - q;
  if (one_minus_q == Scalar(0)) return std::log(y);
  const Scalar u = one_minus_q * std::log(y);
  if (std::abs(u) < Scalar(detail::kQSeriesThreshold))
    return std::log(y) * (Scalar(1) + u * (Scalar(1) / 2 + u * (Scalar(1) / 6)));
  return std::expm1(u) / one_minus_q;
}

// d/dz exp_q(z) = exp_q(z)^q on the interior where exp_q is finite and
// positive; 0 on the flat region (q < 1), +inf past the pole (q > 1).
template <class Scalar>
Scalar exp_q_deriv(Scalar z, Scalar q) {
  const Scalar lz = ln_exp_q(z, q);
  if (std::isinf(lz))
    return lz < Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  return std::exp(q * lz);
}

// d^2/dz^2 exp_q(z) = q exp_q(z)^{2q-1} on the interior.
template <class Scalar>
Scalar exp_q_deriv2(Scalar z, Scalar q) {
  const Scalar lz = ln_exp_q(z, q);
  if (std::isinf(lz))
    return lz < Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  return q * std::exp((Scalar(2) * q - Scalar(1)) * lz);
}

// d/dz log exp_q(z) = 1/(1 + (1-q) z) on the interior; equals 1 at q = 1.
template <class Scalar>
Scalar ln_exp_q_deriv(Scalar z, Scalar q) {
  const Scalar u = Scalar(1) + (Scalar(1) - q) * z;
  if (u <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(1) / u;
}

// d^2/dz^2 log exp_q(z) = (q-1)/(1 + (1-q) z)^2; <= 0 iff q <= 1 (concavity).
template <class Scalar>
Scalar ln_exp_q_deriv2(Scalar z, Scalar q) {
  const Scalar u = Scalar(1) + (Scalar(1) - q) * z;
  if (u <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return (q - Scalar(1)) / (u * u);
}

// Elementwise Eigen-array forms.
inline Eigen::ArrayXd exp_q(const Eigen::ArrayXd& z, double q) {
  return z.unaryExpr([q](double v) { return exp_q(v, q); });
}

inline Eigen::ArrayXd ln_exp_q(const Eigen::ArrayXd& z, double q) {
  return z.unaryExpr([q](double v) { return ln_exp_q(v, q); });
}

}  // namespace qef
