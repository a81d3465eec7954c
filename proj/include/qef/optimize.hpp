#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace qef::detail {

struct NewtonOptions {
  int max_iterations = 500;
  double grad_tol = 1e-10;     // on the gradient infinity norm,
                               // scaled by max(1, |f|)
  double armijo_slope = 1e-4;  // sufficient-increase fraction
  double backtrack = 0.5;
  double min_step = 1e-20;

  // unboundedness detection (norm blow-up / boundary-chasing iterates)
  bool detect_divergence = false;
  double norm_limit = 1e8;
  double margin_limit = 1e-10;
  int boundary_patience = 25;
};

enum class NewtonStatus { Converged, MaxIterations, Stalled, Diverged };

struct NewtonResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  NewtonStatus status = NewtonStatus::MaxIterations;
  bool converged() const { return status == NewtonStatus::Converged; }
};

// Damped Newton ascent on a smooth objective over an open feasible region.
//
//   Value:    value(x) -> double (-inf outside the region or where the
//             objective is undefined)
//   Deriv:    deriv(x, grad, hess) -> void, called only at feasible points
//   Margin:   margin(x) -> double, > 0 strictly inside the region
//             (return 1.0 when the region is all of R^n)
//   MaxStep:  max_step(x, d) -> double, the largest t with x + t d still
//             feasible (+inf when unconstrained); the line search starts at
//             a fraction of it rather than probing infeasible points
//
// The Newton direction comes from an eigenvalue-floored -H so it is always
// an ascent direction; backtracking keeps iterates strictly feasible with a
// finite objective and Armijo increase.
template <class Value, class Deriv, class Margin, class MaxStep>
NewtonResult newton_maximize(Value value, Deriv deriv, Margin margin,
                             MaxStep max_step, Eigen::VectorXd x0,
                             const NewtonOptions& opts = {}) {
  const Eigen::Index dim = x0.size();
  NewtonResult res;
  res.x = std::move(x0);
  res.value = value(res.x);
  if (!std::isfinite(res.value) || !(margin(res.x) > 0.0)) {
    res.status = NewtonStatus::Stalled;  // infeasible start
    return res;
  }

  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd hess(dim, dim);
  int boundary_run = 0;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    deriv(res.x, grad, hess);
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_norm <= opts.grad_tol * std::max(1.0, std::abs(res.value))) {
      res.status = NewtonStatus::Converged;
      return res;
    }

    // ascent direction from the negated Hessian with negative eigenvalues
    // reflected (modified Newton), so curvature scale is preserved off the
    // concave region
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hess);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double floor =
        std::max(1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1.0), 1e-300);
    Eigen::VectorXd inv_ev(dim);
    for (Eigen::Index k = 0; k < dim; ++k)
      inv_ev[k] = 1.0 / std::max(std::abs(ev[k]), floor);
    const bool proper_newton = ev.minCoeff() > floor;
    const Eigen::VectorXd newton_step =
        es.eigenvectors() * inv_ev.asDiagonal() *
        (es.eigenvectors().transpose() * grad);
    Eigen::VectorXd direction = newton_step;

    // once the quadratic model predicts gains below the objective's double
    // resolution, value comparisons can only accept rounding noise; hand
    // straight over to gradient-norm acceptance
    const double value_resolution = 64.0 *
                                    std::numeric_limits<double>::epsilon() *
                                    std::max(1.0, std::abs(res.value));
    const bool value_blind = grad.dot(newton_step) < value_resolution;

    bool accepted = false;
    for (int pass = 0; pass < 2 && !accepted && !value_blind; ++pass) {
      if (pass == 1) direction = grad / std::max(1.0, res.grad_norm);
      const double slope = grad.dot(direction);
      if (!(slope > 0.0)) continue;
      // fraction-to-boundary cap so backtracking never probes infeasible
      // points along the ray
      double step = std::min(1.0, 0.95 * max_step(res.x, direction));
      if (!(step > 0.0)) continue;
      while (step >= opts.min_step) {
        const Eigen::VectorXd trial = res.x + step * direction;
        const double trial_value = value(trial);
        // strict increase: steps whose improvement underflows double
        // resolution count as failures, not progress
        if (std::isfinite(trial_value) && margin(trial) > 0.0 &&
            trial_value > res.value &&
            trial_value >= res.value + opts.armijo_slope * step * slope) {
          res.x = trial;
          res.value = trial_value;
          accepted = true;
          break;
        }
        step *= opts.backtrack;
      }
    }
    if (!accepted && proper_newton) {
      // Value resolution is exhausted but the quadratic tail can still run:
      // accept a (possibly damped) Newton step on gradient-norm decrease,
      // tolerating value changes at rounding scale.
      const double slack =
          32.0 * std::numeric_limits<double>::epsilon() *
          std::max(1.0, std::abs(res.value));
      double t = std::min(1.0, 0.95 * max_step(res.x, newton_step));
      for (int attempt = 0; attempt < 3 && !accepted && t > 0.0;
           ++attempt, t *= 0.5) {
        const Eigen::VectorXd trial = res.x + t * newton_step;
        const double trial_value = value(trial);
        if (!(std::isfinite(trial_value) && margin(trial) > 0.0 &&
              trial_value >= res.value - slack))
          continue;
        Eigen::VectorXd trial_grad(dim);
        Eigen::MatrixXd trial_hess(dim, dim);
        deriv(trial, trial_grad, trial_hess);
        if (trial_grad.lpNorm<Eigen::Infinity>() <
            (1.0 - 0.5 * t) * res.grad_norm) {
          res.x = trial;
          res.value = trial_value;
          accepted = true;
        }
      }
    }
    if (!accepted) {
      // no improving feasible step exists at double resolution; if that
      // happens pinned against the boundary, the supremum is not attained
      if (opts.detect_divergence && margin(res.x) < opts.margin_limit) {
        res.status = NewtonStatus::Diverged;
        return res;
      }
      res.status = res.grad_norm <=
                           1e-8 * std::max(1.0, std::abs(res.value))
                       ? NewtonStatus::Converged
                       : NewtonStatus::Stalled;
      return res;
    }

    if (opts.detect_divergence) {
      if (res.x.lpNorm<Eigen::Infinity>() > opts.norm_limit) {
        res.status = NewtonStatus::Diverged;
        return res;
      }
      boundary_run = margin(res.x) < opts.margin_limit ? boundary_run + 1 : 0;
      if (boundary_run >= opts.boundary_patience) {
        res.status = NewtonStatus::Diverged;
        return res;
      }
    }
  }
  res.status = NewtonStatus::MaxIterations;
  return res;
}

}  // namespace qef::detail
