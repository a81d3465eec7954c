#include "qef/glm.hpp"

#include "qef/errors.hpp"
#include "qef/optimize.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace qef {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd eta_of(const BinaryDataset& data, const RawCoefficients& coef) {
  return (data.X * coef.b).array() + coef.a;
}

RawCoefficients unpack(const Eigen::VectorXd& x) {
  return {x[0], x.tail(x.size() - 1)};
}

double objective_value(const BinaryDataset& data, const LinkFamily& family,
                       const Eigen::VectorXd& eta, double kappa) {
  const double m = static_cast<double>(data.rows());
  const double log_m = std::log(m);
  double value = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double lc = family.log_cdf(eta[i]);
    if (data.y[i] != 0) {
      value += lc;
    } else {
      value += family.log_sf(eta[i]);
    }
    if (kappa > 0.0) value += kappa / m * (log_m + lc);
    if (value == -kInf) return -kInf;
  }
  return value;
}

}  // namespace

double glm_log_likelihood(const BinaryDataset& data, const LinkFamily& family,
                          const RawCoefficients& coef) {
  return objective_value(data, family, eta_of(data, coef), 0.0);
}

ObjectiveEval glm_objective_eval(const BinaryDataset& data,
                                 const LinkFamily& family,
                                 const RawCoefficients& coef,
                                 const std::optional<GlmPenalty>& penalty) {
  const Eigen::Index m = data.rows(), p = data.cols();
  const double kappa = penalty ? penalty->kappa : 0.0;
  const double log_m = std::log(static_cast<double>(m));
  const Eigen::VectorXd eta = eta_of(data, coef);

  ObjectiveEval out;
  out.value = 0.0;
  Eigen::VectorXd w(m);  // d(objective term)/d(eta_i)
  Eigen::VectorXd h(m);  // d^2(objective term)/d(eta_i)^2
  for (Eigen::Index i = 0; i < m; ++i) {
    const LinkEval ev = family.evaluate(eta[i]);
    const double r1 = std::exp(ev.log_pdf - ev.log_cdf);  // g/G
    const double r0 = std::exp(ev.log_pdf - ev.log_sf);   // g/(1-G)
    double wi, hi;
    if (data.y[i] != 0) {
      out.value += ev.log_cdf;
      wi = r1;
      hi = r1 * (ev.dlog_pdf - r1);
    } else {
      out.value += ev.log_sf;
      wi = -r0;
      hi = -r0 * (ev.dlog_pdf + r0);
    }
    if (kappa > 0.0) {
      const double scale = kappa / static_cast<double>(m);
      out.value += scale * (log_m + ev.log_cdf);
      wi += scale * r1;
      hi += scale * r1 * (ev.dlog_pdf - r1);
    }
    w[i] = wi;
    h[i] = hi;
  }
  out.grad.resize(p + 1);
  out.grad[0] = w.sum();
  out.grad.tail(p) = data.X.transpose() * w;
  out.hess.resize(p + 1, p + 1);
  out.hess(0, 0) = h.sum();
  const Eigen::VectorXd xh = data.X.transpose() * h;
  out.hess.block(0, 1, 1, p) = xh.transpose();
  out.hess.block(1, 0, p, 1) = xh;
  out.hess.block(1, 1, p, p) =
      data.X.transpose() * h.asDiagonal() * data.X;
  return out;
}

GlmFit fit_glm(const BinaryDataset& data, const LinkFamily& family,
               const std::optional<GlmPenalty>& penalty) {
  if (data.rows() < 1 || data.cols() < 1)
    throw DataError("fit_glm: empty dataset");
  if (!data.has_both_classes())
    throw DataError("fit_glm: dataset must contain both label classes");
  if (penalty && penalty->kappa < 0.0)
    throw std::invalid_argument("fit_glm: kappa must be nonnegative");

  const Eigen::Index p = data.cols();
  const double kappa = penalty ? penalty->kappa : 0.0;

  const auto value = [&](const Eigen::VectorXd& x) {
    return objective_value(data, family, eta_of(data, unpack(x)), kappa);
  };
  const auto deriv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess) {
    const ObjectiveEval ev = glm_objective_eval(data, family, unpack(x), penalty);
    grad = ev.grad;
    hess = ev.hess;
  };
  const auto margin = [](const Eigen::VectorXd&) { return 1.0; };
  const auto max_step = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::numeric_limits<double>::infinity();
  };

  detail::NewtonOptions opts;
  opts.detect_divergence = true;  // norm blow-up = perfect separation

  const double ybar =
      static_cast<double>(data.positives()) / static_cast<double>(data.rows());
  Eigen::VectorXd start = Eigen::VectorXd::Zero(p + 1);
  start[0] = family.quantile(ybar);

  std::vector<Eigen::VectorXd> starts{start};
  const bool non_concave =
      family.kind() == LinkKind::Cauchy ||
      (family.kind() == LinkKind::TLogistic && family.t() > 1.0);
  if (non_concave) {
    // deterministic multistart: sign patterns of +-0.5 on the leading
    // coordinates
    const int k = static_cast<int>(std::min<Eigen::Index>(p + 1, 3));
    for (int mask = 0; mask < (1 << k); ++mask) {
      Eigen::VectorXd s = start;
      for (int j = 0; j < k; ++j) s[j] += (mask & (1 << j)) ? 0.5 : -0.5;
      starts.push_back(s);
    }
  }

  bool have_best = false;
  detail::NewtonResult best;
  for (const auto& s : starts) {
    const detail::NewtonResult res =
        detail::newton_maximize(value, deriv, margin, max_step, s, opts);
    if (res.status == detail::NewtonStatus::Diverged)
      throw SeparationError(
          "fit_glm: objective unbounded (perfect separation); parameter norm "
          "exceeded " +
          std::to_string(opts.norm_limit));
    if (!have_best || res.value > best.value ||
        (res.value == best.value && res.grad_norm < best.grad_norm)) {
      best = res;
      have_best = true;
    }
  }

  GlmFit fit;
  fit.coefficients = unpack(best.x);
  fit.log_likelihood = best.value;
  fit.converged = best.converged();
  fit.iterations = best.iterations;
  fit.gradient_norm = best.grad_norm;
  return fit;
}

NormalizedCoefficients normalize_coefficients(const RawCoefficients& coef,
                                              const NormalizingTriple& triple) {
  if (!(triple.d > 0.0))
    throw std::invalid_argument("normalize_coefficients: d_m must be > 0");
  return {(coef.a - triple.c) / triple.d, coef.b / triple.d};
}

RawCoefficients denormalize_coefficients(const NormalizedCoefficients& coef,
                                         const NormalizingTriple& triple) {
  if (!(triple.d > 0.0))
    throw std::invalid_argument("denormalize_coefficients: d_m must be > 0");
  return {triple.c + triple.d * coef.alpha, triple.d * coef.beta};
}

}  // namespace qef
