#pragma once

#include "qef/data.hpp"
#include "qef/evt.hpp"
#include "qef/links.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace qef {

// Deterministic benchmark design: n positives on the grid
// 0.4 + 0.4 (i-1)/(n-1) and m - n controls on (i-n-1)/(m-n-1).
struct GridSampleSpec {
  Eigen::Index n;
  Eigen::Index m;
};

BinaryDataset generate_grid_sample(const GridSampleSpec& spec);

// Draws X_i iid from F and Y_i ~ Bernoulli(G(c_m + d_m (alpha + beta^T X_i)))
// with (c_m, d_m) from normalizing_sequence; deterministic given the seed.
BinaryDataset simulate_imbalanced(const LinkFamily& family,
                                  const CovariateDistribution& dist,
                                  double alpha, const Eigen::VectorXd& beta,
                                  std::int64_t m, std::uint64_t seed);

// Mutually disjoint, nonempty index sets over a distribution's support.
struct RegionPartition {
  std::vector<std::vector<Eigen::Index>> regions;

  static RegionPartition halves(Eigen::Index support_size);
  void validate(Eigen::Index support_size) const;
};

struct RegionReport {
  std::vector<Eigen::Index> indices;
  double lambda = 0.0;  // limit intensity of the region
  std::vector<double> empirical_pmf;
  std::vector<double> poisson_pmf;
  double tv_distance = 0.0;
};

struct PoissonLimitReport {
  std::int64_t m = 0;
  std::int64_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<RegionReport> regions;
  Eigen::MatrixXd correlation;  // across region counts
};

// Distribution of positive counts per region across replications against
// the limiting Poisson law.  Replication r uses the stream Rng(seed, r+1);
// within a replication the per-support-point positive counts are drawn by
// sequential conditional binomial inversion in support order, which has the
// same law as row-by-row simulation.
PoissonLimitReport verify_poisson_limit(const LinkFamily& family,
                                        const CovariateDistribution& dist,
                                        double alpha,
                                        const Eigen::VectorXd& beta,
                                        const RegionPartition& partition,
                                        std::int64_t m,
                                        std::int64_t replications,
                                        std::uint64_t seed);

// Which covariates form the base measure F in the experiments.
enum class FVariant {
  AllCovariates,  // empirical distribution of all m covariates (default)
  ControlsOnly,   // only the m - n rows with Y = 0
};

struct TableCell {
  double alpha = 0.0;
  double beta = 0.0;
  bool ok = false;
  std::string note;  // "divergent" etc. when !ok
};

struct ConvergenceRow {
  std::int64_t m = 0;
  TableCell poisson;
  std::vector<TableCell> glm;  // one per link, residuals vs poisson
};

struct ConvergenceReport {
  double q = 1.0;
  double kappa = 0.0;
  Eigen::Index n = 0;
  std::vector<LinkFamily> links;
  std::vector<ConvergenceRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

// One row per m: fit the point-process model on the grid sample (F built
// per the variant) and each binomial regression (both penalized by kappa
// when kappa > 0), with regression coefficients normalized to the limit
// scale.  Divergent fits become labeled cells.
ConvergenceReport run_convergence_experiment(
    double q, const std::vector<LinkFamily>& links, const GridSampleSpec& spec,
    const std::vector<std::int64_t>& m_list, double kappa,
    FVariant variant = FVariant::AllCovariates);

// "logit", "probit", "cloglog", "cauchit", ... column heading for a link.
std::string link_display_name(const LinkFamily& family);

}  // namespace qef
