#include "qef/simlab.hpp"

#include "oracles.hpp"
#include "qef/errors.hpp"
#include "qef/ppp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace qef;

namespace {

CovariateDistribution four_point() {
  Eigen::MatrixXd support(4, 1);
  support << -1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0;
  return CovariateDistribution(support, Eigen::VectorXd::Constant(4, 0.25));
}

Eigen::VectorXd beta1(double b) { return Eigen::VectorXd::Constant(1, b); }

}  // namespace

TEST_CASE("grid sample endpoints and counts") {
  const BinaryDataset data = generate_grid_sample({10, 100});
  CHECK(data.rows() == 100);
  CHECK(data.X(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(data.X(9, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(data.X(10, 0) == 0.0);
  CHECK(data.X(99, 0) == 1.0);
  CHECK(data.positives() == 10);

  const BinaryDataset small = generate_grid_sample({2, 4});
  CHECK(small.X(0, 0) == doctest::Approx(0.4));
  CHECK(small.X(1, 0) == doctest::Approx(0.8));
  CHECK(small.X(2, 0) == 0.0);
  CHECK(small.X(3, 0) == 1.0);
  CHECK(small.positives() == 2);

  for (const auto spec : {GridSampleSpec{1, 10}, GridSampleSpec{5, 6}})
    CHECK_THROWS_AS(generate_grid_sample(spec), std::invalid_argument);
}

TEST_CASE("simulate_imbalanced: determinism and Bernoulli mean") {
  const CovariateDistribution dist = four_point();
  const BinaryDataset a =
      simulate_imbalanced(LinkFamily::logistic(), dist, 0.0, beta1(0.0),
                          1000, 42);
  const BinaryDataset b =
      simulate_imbalanced(LinkFamily::logistic(), dist, 0.0, beta1(0.0),
                          1000, 42);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  const BinaryDataset c =
      simulate_imbalanced(LinkFamily::logistic(), dist, 0.0, beta1(0.0),
                          1000, 43);
  CHECK(a.X != c.X);

  // beta = 0, logistic: each row has success probability G(-log m) =
  // 1/(m+1); mean positives over replications must sit within 3 MC sigma
  const std::int64_t m = 10000;
  const int reps = 300;
  std::int64_t total = 0;
  for (int r = 0; r < reps; ++r)
    total += simulate_imbalanced(LinkFamily::logistic(), dist, 0.0,
                                 beta1(0.0), m, 1000 + r)
                 .positives();
  const double p = 1.0 / (static_cast<double>(m) + 1.0);
  const double mean = static_cast<double>(m) * p;
  const double sigma =
      std::sqrt(static_cast<double>(m) * p * (1.0 - p) / reps);
  CHECK(std::abs(static_cast<double>(total) / reps - mean) < 3.0 * sigma);
}

TEST_CASE("joint probability P(Y=1, X in A) matches the limit intensity") {
  // P(Y=1, X in A) = lambda(A)/m + o(1/m), estimated over replications
  const CovariateDistribution dist = four_point();
  const double alpha = 0.3, beta = 0.5;
  const std::int64_t m = 1000;
  const int reps = 10000;
  const std::vector<Eigen::Index> region = {2, 3};

  std::int64_t hits = 0;
  for (int r = 0; r < reps; ++r) {
    const BinaryDataset data = simulate_imbalanced(
        LinkFamily::logistic(), dist, alpha, beta1(beta), m, 7000 + r);
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (data.y[i] != 0 && data.X(i, 0) > 0.0) ++hits;
  }
  const PointProcessModel limit{1.0, dist, alpha, beta1(beta)};
  const double target = region_intensity(limit, region) / static_cast<double>(m);
  const double p_hat = static_cast<double>(hits) /
                       (static_cast<double>(reps) * static_cast<double>(m));
  const double se = std::sqrt(target * (1.0 - target) /
                              (static_cast<double>(reps) * static_cast<double>(m)));
  CHECK(std::abs(p_hat - target) < 3.0 * se + 2.0 / (static_cast<double>(m) * m));
}

TEST_CASE("region partition validation") {
  RegionPartition bad_overlap{{{0, 1}, {1, 2}}};
  CHECK_THROWS_AS(bad_overlap.validate(4), std::invalid_argument);
  RegionPartition bad_empty{{{0}, {}}};
  CHECK_THROWS_AS(bad_empty.validate(4), std::invalid_argument);
  RegionPartition bad_range{{{0, 7}}};
  CHECK_THROWS_AS(bad_range.validate(4), std::invalid_argument);
  const RegionPartition halves = RegionPartition::halves(5);
  CHECK(halves.regions.size() == 2);
  CHECK(halves.regions[0].size() == 2);
  CHECK(halves.regions[1].size() == 3);
  CHECK_NOTHROW(halves.validate(5));
}

TEST_CASE("poisson limit report: TV distance, correlation, determinism") {
  const CovariateDistribution dist = four_point();
  RegionPartition full{{{0, 1, 2, 3}}};
  const PoissonLimitReport one = verify_poisson_limit(
      LinkFamily::logistic(), dist, 0.0, beta1(0.0), full, 10000, 20000, 11);
  CHECK(one.regions.size() == 1);
  CHECK(one.regions[0].lambda == doctest::Approx(1.0));
  CHECK(one.regions[0].tv_distance < 0.02);
  CHECK(one.correlation(0, 0) == doctest::Approx(1.0));

  // empirical pmf sums to one
  double mass = 0.0;
  for (const double p : one.regions[0].empirical_pmf) mass += p;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  const PoissonLimitReport again = verify_poisson_limit(
      LinkFamily::logistic(), dist, 0.0, beta1(0.0), full, 10000, 20000, 11);
  CHECK(again.regions[0].tv_distance == one.regions[0].tv_distance);
  CHECK(again.regions[0].empirical_pmf == one.regions[0].empirical_pmf);

  const PoissonLimitReport halves = verify_poisson_limit(
      LinkFamily::logistic(), dist, 0.2, beta1(0.4),
      RegionPartition::halves(4), 10000, 20000, 13);
  CHECK(halves.regions.size() == 2);
  CHECK(std::abs(halves.correlation(0, 1)) < 0.03);
  for (const auto& region : halves.regions) CHECK(region.tv_distance < 0.02);
}

TEST_CASE("regions with zero intensity never see events") {
  // uniform link, q = 0: exp_0(alpha + beta xi) = 0 below the cutoff
  Eigen::MatrixXd support(3, 1);
  support << -2.0, 0.0, 1.0;
  const CovariateDistribution dist(support,
                                   Eigen::VectorXd::Constant(3, 1.0 / 3.0));
  RegionPartition split{{{0}, {1, 2}}};
  const PoissonLimitReport report = verify_poisson_limit(
      LinkFamily::uniform(), dist, 0.0, beta1(1.0), split, 1000, 5000, 3);
  CHECK(report.regions[0].lambda == 0.0);
  CHECK(report.regions[0].empirical_pmf.size() == 1);  // only count 0 observed
  CHECK(report.regions[0].empirical_pmf[0] == 1.0);
  CHECK(report.regions[0].tv_distance == doctest::Approx(0.0));
}

TEST_CASE("large-intensity counts still match the Poisson law") {
  // per-point binomial means above the inversion threshold exercise the
  // recursive splitting path of the sampler
  const CovariateDistribution dist = four_point();
  RegionPartition full{{{0, 1, 2, 3}}};
  const double alpha = 5.5;  // Lambda_1 = e^{5.5} ~ 244.7
  const PoissonLimitReport report = verify_poisson_limit(
      LinkFamily::logistic(), dist, alpha, beta1(0.0), full, 1000000, 5000,
      17);
  const double lambda = report.regions[0].lambda;
  CHECK(lambda == doctest::Approx(std::exp(5.5)).epsilon(1e-12));
  double mean = 0.0;
  for (std::size_t k = 0; k < report.regions[0].empirical_pmf.size(); ++k)
    mean += static_cast<double>(k) * report.regions[0].empirical_pmf[k];
  CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / 5000.0) + 0.1);
  CHECK(report.regions[0].tv_distance < 0.1);
}

TEST_CASE("simulation with two-dimensional covariates") {
  Eigen::MatrixXd support(3, 2);
  support << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  const CovariateDistribution dist(support,
                                   Eigen::VectorXd::Constant(3, 1.0 / 3.0));
  Eigen::VectorXd beta(2);
  beta << 0.5, -0.25;
  const BinaryDataset data = simulate_imbalanced(
      LinkFamily::gumbel_min(), dist, 0.2, beta, 2000, 99);
  CHECK(data.cols() == 2);
  CHECK(data.rows() == 2000);
  const BinaryDataset again = simulate_imbalanced(
      LinkFamily::gumbel_min(), dist, 0.2, beta, 2000, 99);
  CHECK(data.X == again.X);
  CHECK(data.y == again.y);
}

TEST_CASE("poisson limit TV shrinks with m") {
  const CovariateDistribution dist = four_point();
  RegionPartition full{{{0, 1, 2, 3}}};
  const PoissonLimitReport coarse = verify_poisson_limit(
      LinkFamily::cauchy(), dist, 0.1, beta1(0.2), full, 30, 40000, 5);
  const PoissonLimitReport fine = verify_poisson_limit(
      LinkFamily::cauchy(), dist, 0.1, beta1(0.2), full, 3000, 40000, 5);
  CHECK(fine.regions[0].tv_distance < coarse.regions[0].tv_distance);
}

TEST_CASE("convergence experiment reproduces the q = 1 table rows") {
  const ConvergenceReport report = run_convergence_experiment(
      1.0, {LinkFamily::logistic(), LinkFamily::gumbel_min()}, {10, 0},
      {100, 1000}, 0.0);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].m == 100);
  CHECK(report.rows[0].poisson.alpha == doctest::Approx(1.6504).epsilon(4e-4));
  CHECK(report.rows[0].poisson.beta == doctest::Approx(1.1737).epsilon(5e-4));
  CHECK(report.rows[0].glm[0].alpha == doctest::Approx(1.6883).epsilon(7e-4));
  CHECK(report.rows[0].glm[0].beta == doctest::Approx(1.3067).epsilon(8e-4));
  CHECK(report.rows[1].glm[1].alpha == doctest::Approx(1.6322).epsilon(7e-4));
  CHECK(report.rows[1].glm[1].beta == doctest::Approx(1.2260).epsilon(9e-4));

  // determinism: bit-identical serialized reports
  const ConvergenceReport again = run_convergence_experiment(
      1.0, {LinkFamily::logistic(), LinkFamily::gumbel_min()}, {10, 0},
      {100, 1000}, 0.0);
  CHECK(report.to_csv() == again.to_csv());
  CHECK(report.to_text() == again.to_text());
}

TEST_CASE("logit-vs-poisson gap shrinks monotonically in m (q = 1)") {
  const ConvergenceReport report = run_convergence_experiment(
      1.0, {LinkFamily::logistic()}, {10, 0}, {100, 1000, 10000, 100000}, 0.0);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    REQUIRE(row.poisson.ok);
    REQUIRE(row.glm[0].ok);
    const double gap = std::max(std::abs(row.glm[0].alpha - row.poisson.alpha),
                                std::abs(row.glm[0].beta - row.poisson.beta));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("kappa > 0 penalizes both estimators in the experiment") {
  const ConvergenceReport plain = run_convergence_experiment(
      1.0, {LinkFamily::logistic()}, {10, 0}, {100}, 0.0);
  const ConvergenceReport smoothed = run_convergence_experiment(
      1.0, {LinkFamily::logistic()}, {10, 0}, {100}, 0.5);
  REQUIRE(smoothed.rows[0].poisson.ok);
  REQUIRE(smoothed.rows[0].glm[0].ok);
  // the smoothing shifts both columns away from the plain fits
  CHECK(std::abs(smoothed.rows[0].poisson.alpha -
                 plain.rows[0].poisson.alpha) > 1e-4);
  CHECK(std::abs(smoothed.rows[0].glm[0].alpha - plain.rows[0].glm[0].alpha) >
        1e-4);
}

TEST_CASE("experiment rejects links with a different tail index") {
  CHECK_THROWS_AS(run_convergence_experiment(1.0, {LinkFamily::cauchy()},
                                             {10, 0}, {100}, 0.0),
                  ConfigError);
}

TEST_CASE("csv keeps field counts aligned for divergent cells") {
  ConvergenceReport report;
  report.q = 1.0;
  report.n = 10;
  report.links = {LinkFamily::logistic()};
  ConvergenceRow row;
  row.m = 100;
  row.poisson = {0.0, 0.0, false, "divergent"};
  row.glm.push_back({1.5, 2.5, true, ""});
  report.rows.push_back(row);
  const std::string csv = report.to_csv();
  const auto count_fields = [](const std::string& line) {
    return 1 + std::count(line.begin(), line.end(), ',');
  };
  const auto newline = csv.find('\n');
  const std::string header = csv.substr(0, newline);
  const std::string body = csv.substr(newline + 1, csv.size() - newline - 2);
  CHECK(count_fields(header) == count_fields(body));
  CHECK(body.find("divergent,divergent") != std::string::npos);
}

TEST_CASE("report serialization shape") {
  const ConvergenceReport report = run_convergence_experiment(
      1.0, {LinkFamily::logistic()}, {10, 0}, {100}, 0.0);
  const std::string csv = report.to_csv();
  CHECK(csv.find("m,poisson_alpha,poisson_beta,logit_alpha,logit_beta,"
                 "logit_dalpha,logit_dbeta") == 0);
  CHECK(csv.find("\n100,") != std::string::npos);
  const std::string text = report.to_text();
  CHECK(text.find("Poisson process") != std::string::npos);
  CHECK(text.find("10^2") != std::string::npos);
}
