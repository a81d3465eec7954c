#pragma once

#include "qef/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qef {

struct RootOptions {
  double residual_tol = 1e-14;  // stop when |f(x)| drops below this
  int max_iterations = 500;
};

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Bracketing solve: bisection with secant/inverse-quadratic acceleration
// (Brent-style contract).  Whenever the bracket fails to halve within two
// iterations the next step is a plain bisection, so shrinkage is guaranteed;
// interpolation keeps it superlinear on smooth residuals.  Non-finite
// interior values also force bisection.  Requires a sign change on [lo, hi].
template <class F>
RootResult find_root_brent(F f, double lo, double hi,
                           const RootOptions& opts = {}) {
  RootResult res;
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return {a, 0.0, 0, true};
  if (fb == 0.0) return {b, 0.0, 0, true};
  if ((fa > 0) == (fb > 0))
    throw SolverError("find_root_brent: root not bracketed");

  double c = a, fc = fa;  // previous contrapoint, for interpolation
  double prev_width = 2.0 * std::abs(b - a);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    const double width = std::abs(b - a);
    // an interpolation step that failed to halve the bracket forfeits the
    // next step to bisection
    const bool force_bisect = width > 0.5 * prev_width;
    prev_width = width;

    double s;
    const bool interp_ok =
        !force_bisect && std::isfinite(fa) && std::isfinite(fb);
    if (interp_ok && std::isfinite(fc) && fa != fc && fb != fc) {
      // inverse quadratic
      s = a * fb * fc / ((fa - fb) * (fa - fc)) +
          b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else if (interp_ok && fa != fb) {
      s = b - fb * (b - a) / (fb - fa);  // secant
    } else {
      s = 0.5 * (a + b);
    }
    const double lo_b = std::min(a, b), hi_b = std::max(a, b);
    if (!(s > lo_b && s < hi_b)) s = 0.5 * (a + b);

    const double fs = f(s);
    if (fs == 0.0 || std::abs(fs) <= opts.residual_tol) {
      res.x = s;
      res.fx = fs;
      res.converged = true;
      return res;
    }
    c = b;
    fc = fb;
    if ((fs > 0) == (fa > 0)) {
      a = s;
      fa = fs;
    } else {
      b = s;
      fb = fs;
    }
    if (std::isfinite(fa) && std::isfinite(fb) && std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    if (std::abs(b - a) <=
        4.0 * std::numeric_limits<double>::epsilon() *
                std::max(std::abs(a), std::abs(b)) +
            4.0 * std::numeric_limits<double>::denorm_min()) {
      // bracket exhausted at double resolution
      res.x = std::isfinite(fb) && std::abs(fb) <= std::abs(fa) ? b : a;
      res.fx = f(res.x);
      res.converged = std::abs(res.fx) <= 1e4 * opts.residual_tol;
      return res;
    }
  }
  res.x = b;
  res.fx = fb;
  res.converged = std::abs(fb) <= opts.residual_tol;
  return res;
}

}  // namespace qef
