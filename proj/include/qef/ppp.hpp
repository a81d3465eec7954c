#pragma once

#include "qef/data.hpp"
#include "qef/glm.hpp"  // ObjectiveEval

#include <Eigen/Core>

#include <vector>

namespace qef {

// Intensity measure exp_q(alpha + beta^T x) F(dx) on a finite covariate
// distribution F.
struct PointProcessModel {
  double q;
  CovariateDistribution dist;
  double alpha = 0.0;
  Eigen::VectorXd beta;

  Eigen::VectorXd support_eta() const {
    return (dist.support() * beta).array() + alpha;
  }
};

struct PointProcessFit {
  PointProcessModel model;
  double kappa = 0.0;
  double penalized_objective = 0.0;
  double total_intensity = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double theta_margin = 0.0;  // min_j 1 + (1-q)(alpha + beta^T xi_j)
};

struct ThetaCheck {
  bool inside = false;
  double margin = 0.0;
};

// Theta = {(alpha, beta) : 1 + (1-q)(alpha + beta^T xi_j) > 0 for all j};
// margin is the minimum of the left-hand sides.
ThetaCheck theta_contains(double q, const CovariateDistribution& dist,
                          double alpha, const Eigen::VectorXd& beta);

// Lambda_q = sum_j p_j exp_q(alpha + beta^T xi_j)
double total_intensity(const PointProcessModel& model);

// lambda(A) = sum_{j in region} p_j exp_q(alpha + beta^T xi_j)
double region_intensity(const PointProcessModel& model,
                        const std::vector<Eigen::Index>& region);

// Penalized log-likelihood
//   -Lambda_q + sum_i log exp_q(alpha + beta^T x_i)
//   + kappa sum_j p_j log exp_q(alpha + beta^T xi_j)
// as an extended real; concave in (alpha, beta) for 0 <= q <= 1.
double penalized_objective(double q, const CovariateDistribution& dist,
                           const EventSample& sample, double kappa,
                           double alpha, const Eigen::VectorXd& beta);

// Same value with analytic gradient and Hessian in (alpha, beta), for use
// strictly inside Theta.
ObjectiveEval penalized_objective_eval(double q,
                                       const CovariateDistribution& dist,
                                       const EventSample& sample, double kappa,
                                       double alpha,
                                       const Eigen::VectorXd& beta);

struct AdditiveSmoothingOptions {
  bool validate_membership = true;  // events must match support rows
  Eigen::VectorXd start;  // optional (alpha, beta) start; the origin if empty
};

// Maximizer of the penalized objective over Theta (the additive-smoothing
// estimator; the plain MLE when kappa = 0, which may not exist).  Throws
// DivergenceError when kappa = 0 and the iterates chase the boundary of
// Theta or blow up in norm with the objective still increasing.
PointProcessFit fit_additive_smoothing(double q,
                                       const CovariateDistribution& dist,
                                       const EventSample& sample, double kappa,
                                       const AdditiveSmoothingOptions& options = {});

// log of e^{-Lambda}/n! prod_i exp_q(alpha + beta^T x_i)
double point_process_log_likelihood(const PointProcessModel& model,
                                    const EventSample& sample);

// Mass of support atom j under the normalized density
// exp_q(alpha + beta^T x)/Lambda_q with respect to F.
double q_exponential_density(const PointProcessModel& model, Eigen::Index j);

}  // namespace qef
