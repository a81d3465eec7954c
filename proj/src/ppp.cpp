#include "qef/ppp.hpp"

#include "qef/errors.hpp"
#include "qef/optimize.hpp"
#include "qef/qexp.hpp"

#include <cmath>
#include <limits>

namespace qef {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double theta_margin_at(double q, const CovariateDistribution& dist,
                       double alpha, const Eigen::VectorXd& beta) {
  const Eigen::ArrayXd eta =
      ((dist.support() * beta).array() + alpha) * (1.0 - q) + 1.0;
  return eta.minCoeff();
}

double objective_value(double q, const CovariateDistribution& dist,
                       const EventSample& sample, double kappa, double alpha,
                       const Eigen::VectorXd& beta) {
  const Eigen::ArrayXd eta_s = (dist.support() * beta).array() + alpha;
  double lambda = 0.0;
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < dist.size(); ++j) {
    const double lz = ln_exp_q(eta_s[j], q);
    lambda += dist.weights()[j] * std::exp(lz);
    if (kappa > 0.0) penalty += dist.weights()[j] * lz;
  }
  if (!std::isfinite(lambda)) return -kInf;  // q > 1 past the pole
  double data_term = 0.0;
  if (sample.size() > 0) {
    const Eigen::ArrayXd eta_e = (sample.points * beta).array() + alpha;
    for (Eigen::Index i = 0; i < sample.size(); ++i)
      data_term += ln_exp_q(eta_e[i], q);
  }
  return -lambda + data_term + kappa * penalty;
}

}  // namespace

ThetaCheck theta_contains(double q, const CovariateDistribution& dist,
                          double alpha, const Eigen::VectorXd& beta) {
  const double margin = theta_margin_at(q, dist, alpha, beta);
  return {margin > 0.0, margin};
}

double total_intensity(const PointProcessModel& model) {
  const Eigen::ArrayXd eta = model.support_eta().array();
  double lambda = 0.0;
  for (Eigen::Index j = 0; j < model.dist.size(); ++j)
    lambda += model.dist.weights()[j] * exp_q(eta[j], model.q);
  return lambda;
}

double region_intensity(const PointProcessModel& model,
                        const std::vector<Eigen::Index>& region) {
  const Eigen::ArrayXd eta = model.support_eta().array();
  double lambda = 0.0;
  for (const Eigen::Index j : region) {
    if (j < 0 || j >= model.dist.size())
      throw std::invalid_argument("region_intensity: index out of range");
    lambda += model.dist.weights()[j] * exp_q(eta[j], model.q);
  }
  return lambda;
}

double penalized_objective(double q, const CovariateDistribution& dist,
                           const EventSample& sample, double kappa,
                           double alpha, const Eigen::VectorXd& beta) {
  if (kappa < 0.0)
    throw std::invalid_argument("penalized_objective: kappa must be >= 0");
  return objective_value(q, dist, sample, kappa, alpha, beta);
}

ObjectiveEval penalized_objective_eval(double q,
                                       const CovariateDistribution& dist,
                                       const EventSample& sample, double kappa,
                                       double alpha,
                                       const Eigen::VectorXd& beta) {
  const Eigen::Index p = dist.dim();
  ObjectiveEval out;
  out.value = 0.0;
  out.grad = Eigen::VectorXd::Zero(p + 1);
  out.hess = Eigen::MatrixXd::Zero(p + 1, p + 1);

  Eigen::VectorXd v(p + 1);
  const auto accumulate = [&](double wv, double wg, double wh,
                              const auto& point) {
    v[0] = 1.0;
    v.tail(p) = point.transpose();
    out.value += wv;
    out.grad += wg * v;
    out.hess += wh * v * v.transpose();
  };

  for (Eigen::Index j = 0; j < dist.size(); ++j) {
    const double pj = dist.weights()[j];
    const double eta = dist.support().row(j).dot(beta) + alpha;
    const double lz = ln_exp_q(eta, q);
    const double e1 = std::exp(lz);                          // exp_q
    const double d1 = std::exp(q * lz);                      // d exp_q
    const double d2 = q * std::exp((2.0 * q - 1.0) * lz);    // d2 exp_q
    const double l1 = std::exp((q - 1.0) * lz);              // d ln exp_q
    const double l2 = (q - 1.0) * std::exp(2.0 * (q - 1.0) * lz);
    accumulate(-pj * e1 + kappa * pj * lz, -pj * d1 + kappa * pj * l1,
               -pj * d2 + kappa * pj * l2, dist.support().row(j));
  }
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double eta = sample.points.row(i).dot(beta) + alpha;
    const double lz = ln_exp_q(eta, q);
    const double l1 = std::exp((q - 1.0) * lz);
    const double l2 = (q - 1.0) * std::exp(2.0 * (q - 1.0) * lz);
    accumulate(lz, l1, l2, sample.points.row(i));
  }
  return out;
}

PointProcessFit fit_additive_smoothing(double q,
                                       const CovariateDistribution& dist,
                                       const EventSample& sample, double kappa,
                                       const AdditiveSmoothingOptions& options) {
  if (kappa < 0.0)
    throw std::invalid_argument("fit_additive_smoothing: kappa must be >= 0");
  if (options.validate_membership) validate_events(dist, sample);

  const Eigen::Index p = dist.dim();
  const auto value = [&](const Eigen::VectorXd& x) {
    return objective_value(q, dist, sample, kappa, x[0], x.tail(p));
  };
  const auto deriv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess) {
    const ObjectiveEval ev =
        penalized_objective_eval(q, dist, sample, kappa, x[0], x.tail(p));
    grad = ev.grad;
    hess = ev.hess;
  };
  const auto margin = [&](const Eigen::VectorXd& x) {
    return theta_margin_at(q, dist, x[0], x.tail(p));
  };
  // largest feasible step along d: the Theta constraints are affine in t
  const auto max_step = [&](const Eigen::VectorXd& x,
                            const Eigen::VectorXd& d) {
    if (q == 1.0) return std::numeric_limits<double>::infinity();
    const Eigen::ArrayXd margins =
        ((dist.support() * x.tail(p)).array() + x[0]) * (1.0 - q) + 1.0;
    const Eigen::ArrayXd deltas =
        ((dist.support() * d.tail(p)).array() + d[0]) * (1.0 - q);
    double t_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < deltas.size(); ++j)
      if (deltas[j] < 0.0) t_max = std::min(t_max, margins[j] / -deltas[j]);
    return t_max;
  };

  detail::NewtonOptions opts;
  opts.detect_divergence = kappa == 0.0;
  opts.max_iterations = 2000;
  // closed-form oracle checks need coefficient accuracy near 1e-8 even on
  // weakly curved instances; the quadratic tail makes this cheap
  opts.grad_tol = 1e-13;

  // the origin always belongs to Theta
  Eigen::VectorXd start0 = Eigen::VectorXd::Zero(p + 1);
  if (options.start.size() > 0) {
    if (options.start.size() != p + 1)
      throw std::invalid_argument("fit_additive_smoothing: start size");
    if (!(theta_margin_at(q, dist, options.start[0],
                          options.start.tail(p)) > 0.0))
      throw std::invalid_argument(
          "fit_additive_smoothing: start outside Theta");
    start0 = options.start;
  }
  std::vector<Eigen::VectorXd> starts{start0};
  if (q < 0.0 || q > 1.0) {
    const int k = static_cast<int>(std::min<Eigen::Index>(p + 1, 3));
    for (int mask = 0; mask < (1 << k); ++mask) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(p + 1);
      for (int j = 0; j < k; ++j) s[j] += (mask & (1 << j)) ? 0.5 : -0.5;
      // shrink the perturbation until strictly inside Theta
      int halvings = 0;
      while (margin(s) <= 0.0 && halvings++ < 60) s *= 0.5;
      if (margin(s) > 0.0) starts.push_back(s);
    }
  }

  bool have_best = false;
  detail::NewtonResult best;
  for (const auto& s : starts) {
    const detail::NewtonResult res =
        detail::newton_maximize(value, deriv, margin, max_step, s, opts);
    if (res.status == detail::NewtonStatus::Diverged)
      throw DivergenceError(
          "fit_additive_smoothing: maximum likelihood estimate does not "
          "exist (kappa = 0); iterates " +
          std::string(res.x.lpNorm<Eigen::Infinity>() > 1e7
                          ? "diverged in norm"
                          : "approached the boundary of Theta"));
    if (!have_best || res.value > best.value ||
        (res.value == best.value && res.grad_norm < best.grad_norm)) {
      best = res;
      have_best = true;
    }
  }

  PointProcessFit fit{
      PointProcessModel{q, dist, best.x[0], best.x.tail(p)},
      kappa,
      best.value,
      0.0,
      best.converged(),
      best.iterations,
      best.grad_norm,
      margin(best.x)};
  fit.total_intensity = total_intensity(fit.model);
  return fit;
}

double point_process_log_likelihood(const PointProcessModel& model,
                                    const EventSample& sample) {
  const double n = static_cast<double>(sample.size());
  return penalized_objective(model.q, model.dist, sample, 0.0, model.alpha,
                             model.beta) -
         std::lgamma(n + 1.0);
}

double q_exponential_density(const PointProcessModel& model, Eigen::Index j) {
  if (j < 0 || j >= model.dist.size())
    throw std::invalid_argument("q_exponential_density: index out of range");
  const double lambda = total_intensity(model);
  const double eta = model.dist.support().row(j).dot(model.beta) + model.alpha;
  return model.dist.weights()[j] * exp_q(eta, model.q) / lambda;
}

}  // namespace qef
