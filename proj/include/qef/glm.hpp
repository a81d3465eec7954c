#pragma once

#include "qef/data.hpp"
#include "qef/evt.hpp"
#include "qef/links.hpp"

#include <Eigen/Core>

#include <optional>

namespace qef {

// Coefficients of the raw regression model G(a + b^T x).
struct RawCoefficients {
  double a = 0.0;
  Eigen::VectorXd b;
};

// Coefficients on the imbalanced-asymptotics scale: a = c_m + d_m alpha,
// b = d_m beta.
struct NormalizedCoefficients {
  double alpha = 0.0;
  Eigen::VectorXd beta;
};

struct GlmFit {
  RawCoefficients coefficients;
  double log_likelihood = 0.0;  // maximized objective (penalty included)
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct GlmPenalty {
  double kappa = 0.0;  // adds (kappa/m) sum_i log(m G(a + b^T X_i))
};

struct ObjectiveEval {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// sum_i [Y_i log G(eta_i) + (1 - Y_i) log(1 - G(eta_i))]; -inf when a term
// is log 0.
double glm_log_likelihood(const BinaryDataset& data, const LinkFamily& family,
                          const RawCoefficients& coef);

// Value with analytic gradient and Hessian in (a, b), stacked as
// (a, b_1, ..., b_p).  With a penalty, all three include the penalty term.
ObjectiveEval glm_objective_eval(const BinaryDataset& data,
                                 const LinkFamily& family,
                                 const RawCoefficients& coef,
                                 const std::optional<GlmPenalty>& penalty = {});

// Damped-Newton maximum likelihood (penalized when given), starting from
// (G^{-1}(mean y), 0); non-concave families restart from 8 deterministic
// perturbed starts.  Throws SeparationError when the objective is unbounded,
// DataError unless both classes are present.
GlmFit fit_glm(const BinaryDataset& data, const LinkFamily& family,
               const std::optional<GlmPenalty>& penalty = {});

NormalizedCoefficients normalize_coefficients(const RawCoefficients& coef,
                                              const NormalizingTriple& triple);
RawCoefficients denormalize_coefficients(const NormalizedCoefficients& coef,
                                         const NormalizingTriple& triple);

}  // namespace qef
