#include "qef/simlab.hpp"

#include "qef/errors.hpp"
#include "qef/glm.hpp"
#include "qef/ppp.hpp"
#include "qef/qexp.hpp"
#include "qef/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <cstdio>
#include <set>

namespace qef {

namespace {

// Binomial(n, p) by CDF inversion; large means are split recursively so the
// inversion loop stays short.  Exact in distribution and deterministic.
std::int64_t binomial_sample(Rng& rng, std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double mean = static_cast<double>(n) * p;
  if (mean > 30.0 && n >= 2) {
    const std::int64_t half = n / 2;
    return binomial_sample(rng, half, p) + binomial_sample(rng, n - half, p);
  }
  const double u = rng.uniform();
  const double odds = p / (1.0 - p);
  double pdf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cum = pdf;
  std::int64_t k = 0;
  while (u > cum && k < n) {
    ++k;
    pdf *= odds * static_cast<double>(n - k + 1) / static_cast<double>(k);
    cum += pdf;
    if (pdf < 1e-18 && static_cast<double>(k) > mean) break;  // lost tail
  }
  return k;
}

std::vector<double> poisson_pmf(double lambda, std::size_t count) {
  std::vector<double> pmf(count);
  if (count == 0) return pmf;
  pmf[0] = std::exp(-lambda);
  for (std::size_t k = 1; k < count; ++k)
    pmf[k] = pmf[k - 1] * lambda / static_cast<double>(k);
  return pmf;
}

// two CSV fields (alpha, beta); divergent cells carry the label in both
std::string format_cell(const TableCell& cell, const char* fmt) {
  if (!cell.ok) {
    const std::string label = cell.note.empty() ? "divergent" : cell.note;
    return label + "," + label;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, cell.alpha);
  std::string s = buf;
  s += ",";
  std::snprintf(buf, sizeof(buf), fmt, cell.beta);
  s += buf;
  return s;
}

}  // namespace

BinaryDataset generate_grid_sample(const GridSampleSpec& spec) {
  if (spec.n < 2)
    throw std::invalid_argument("generate_grid_sample: n must be >= 2");
  if (spec.m < spec.n + 2)
    throw std::invalid_argument("generate_grid_sample: m must be >= n + 2");
  BinaryDataset data;
  data.X.resize(spec.m, 1);
  data.y.resize(spec.m);
  const double n1 = static_cast<double>(spec.n - 1);
  const double c1 = static_cast<double>(spec.m - spec.n - 1);
  for (Eigen::Index i = 1; i <= spec.n; ++i) {
    data.X(i - 1, 0) = 0.4 + 0.4 * static_cast<double>(i - 1) / n1;
    data.y[i - 1] = 1;
  }
  for (Eigen::Index i = spec.n + 1; i <= spec.m; ++i) {
    data.X(i - 1, 0) = static_cast<double>(i - spec.n - 1) / c1;
    data.y[i - 1] = 0;
  }
  return data;
}

BinaryDataset simulate_imbalanced(const LinkFamily& family,
                                  const CovariateDistribution& dist,
                                  double alpha, const Eigen::VectorXd& beta,
                                  std::int64_t m, std::uint64_t seed) {
  const NormalizingTriple triple = normalizing_sequence(family, m);
  const Eigen::Index J = dist.size();
  Eigen::VectorXd success(J);
  Eigen::VectorXd cum_weights(J);
  double cum = 0.0;
  for (Eigen::Index j = 0; j < J; ++j) {
    const double eta = alpha + dist.support().row(j).dot(beta);
    if (!std::isfinite(exp_q(eta, triple.q)))
      throw std::invalid_argument(
          "simulate_imbalanced: exp_q(alpha + beta^T xi) infinite on the "
          "support");
    success[j] = family.cdf(triple.c + triple.d * eta);
    cum += dist.weights()[j];
    cum_weights[j] = cum;
  }
  BinaryDataset data;
  data.X.resize(m, dist.dim());
  data.y.resize(m);
  Rng rng(seed, 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = rng.uniform();
    const Eigen::Index j = std::min<Eigen::Index>(
        J - 1, std::lower_bound(cum_weights.data(), cum_weights.data() + J, u) -
                   cum_weights.data());
    data.X.row(i) = dist.support().row(j);
    data.y[i] = rng.bernoulli(success[j]) ? 1 : 0;
  }
  return data;
}

RegionPartition RegionPartition::halves(Eigen::Index support_size) {
  RegionPartition partition;
  const Eigen::Index mid = support_size / 2;
  std::vector<Eigen::Index> lo, hi;
  for (Eigen::Index j = 0; j < support_size; ++j)
    (j < mid ? lo : hi).push_back(j);
  if (!lo.empty()) partition.regions.push_back(std::move(lo));
  if (!hi.empty()) partition.regions.push_back(std::move(hi));
  return partition;
}

void RegionPartition::validate(Eigen::Index support_size) const {
  std::set<Eigen::Index> seen;
  for (const auto& region : regions) {
    if (region.empty())
      throw std::invalid_argument("region partition: empty region");
    for (const Eigen::Index j : region) {
      if (j < 0 || j >= support_size)
        throw std::invalid_argument("region partition: index out of range");
      if (!seen.insert(j).second)
        throw std::invalid_argument("region partition: regions overlap");
    }
  }
}

PoissonLimitReport verify_poisson_limit(const LinkFamily& family,
                                        const CovariateDistribution& dist,
                                        double alpha,
                                        const Eigen::VectorXd& beta,
                                        const RegionPartition& partition,
                                        std::int64_t m,
                                        std::int64_t replications,
                                        std::uint64_t seed) {
  partition.validate(dist.size());
  if (replications < 1)
    throw std::invalid_argument("verify_poisson_limit: need replications >= 1");
  const NormalizingTriple triple = normalizing_sequence(family, m);
  const Eigen::Index J = dist.size();
  const std::size_t R = partition.regions.size();

  // per-support-point probability of (X = xi_j, Y = 1) at sample size m
  Eigen::VectorXd joint(J);
  PointProcessModel limit{triple.q, dist, alpha, beta};
  for (Eigen::Index j = 0; j < J; ++j) {
    const double eta = alpha + dist.support().row(j).dot(beta);
    joint[j] = dist.weights()[j] * family.cdf(triple.c + triple.d * eta);
  }
  std::vector<double> lambda(R);
  for (std::size_t r = 0; r < R; ++r) {
    lambda[r] = region_intensity(limit, partition.regions[r]);
    if (!std::isfinite(lambda[r]))
      throw std::invalid_argument(
          "verify_poisson_limit: exp_q infinite on region " +
          std::to_string(r));
  }
  std::vector<Eigen::Index> region_of(static_cast<std::size_t>(J),
                                      static_cast<Eigen::Index>(-1));
  for (std::size_t r = 0; r < R; ++r)
    for (const Eigen::Index j : partition.regions[r])
      region_of[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(r);

  std::vector<std::vector<std::int64_t>> histogram(R);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R));
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(R),
                                                static_cast<Eigen::Index>(R));
  std::vector<std::int64_t> counts(R);

  for (std::int64_t rep = 0; rep < replications; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep) + 1);
    std::fill(counts.begin(), counts.end(), 0);
    // sequential conditional multinomial over (positive-at-j) cells
    std::int64_t remaining = m;
    double tail_prob = 1.0;
    for (Eigen::Index j = 0; j < J && remaining > 0; ++j) {
      const double cond = std::clamp(joint[j] / tail_prob, 0.0, 1.0);
      const std::int64_t k = binomial_sample(rng, remaining, cond);
      remaining -= k;
      tail_prob = std::max(tail_prob - joint[j], 1e-300);
      if (region_of[static_cast<std::size_t>(j)] >= 0 && k > 0)
        counts[static_cast<std::size_t>(
            region_of[static_cast<std::size_t>(j)])] += k;
    }
    for (std::size_t r = 0; r < R; ++r) {
      const auto c = static_cast<std::size_t>(counts[r]);
      if (histogram[r].size() <= c) histogram[r].resize(c + 1, 0);
      histogram[r][c] += 1;
      sum[static_cast<Eigen::Index>(r)] += static_cast<double>(counts[r]);
      for (std::size_t s = 0; s <= r; ++s)
        cross(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) +=
            static_cast<double>(counts[r]) * static_cast<double>(counts[s]);
    }
  }

  PoissonLimitReport report;
  report.m = m;
  report.replications = replications;
  report.seed = seed;
  const double nrep = static_cast<double>(replications);
  for (std::size_t r = 0; r < R; ++r) {
    RegionReport region;
    region.indices = partition.regions[r];
    region.lambda = lambda[r];
    region.empirical_pmf.resize(histogram[r].size());
    for (std::size_t k = 0; k < histogram[r].size(); ++k)
      region.empirical_pmf[k] = static_cast<double>(histogram[r][k]) / nrep;
    region.poisson_pmf = poisson_pmf(lambda[r], histogram[r].size());
    double tv = 0.0, poisson_mass = 0.0;
    for (std::size_t k = 0; k < histogram[r].size(); ++k) {
      tv += std::abs(region.empirical_pmf[k] - region.poisson_pmf[k]);
      poisson_mass += region.poisson_pmf[k];
    }
    tv += std::max(0.0, 1.0 - poisson_mass);  // Poisson tail beyond max count
    region.tv_distance = 0.5 * tv;
    report.regions.push_back(std::move(region));
  }

  report.correlation.resize(static_cast<Eigen::Index>(R),
                            static_cast<Eigen::Index>(R));
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t s = 0; s <= r; ++s) {
      const double cov =
          cross(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) /
              nrep -
          sum[static_cast<Eigen::Index>(r)] * sum[static_cast<Eigen::Index>(s)] /
              (nrep * nrep);
      const double var_r =
          cross(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) /
              nrep -
          std::pow(sum[static_cast<Eigen::Index>(r)] / nrep, 2);
      const double var_s =
          cross(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) /
              nrep -
          std::pow(sum[static_cast<Eigen::Index>(s)] / nrep, 2);
      const double denom = std::sqrt(std::max(var_r, 0.0) * std::max(var_s, 0.0));
      const double rho = denom > 0.0 ? cov / denom : (r == s ? 1.0 : 0.0);
      report.correlation(static_cast<Eigen::Index>(r),
                         static_cast<Eigen::Index>(s)) = rho;
      report.correlation(static_cast<Eigen::Index>(s),
                         static_cast<Eigen::Index>(r)) = rho;
    }
  }
  return report;
}

std::string link_display_name(const LinkFamily& family) {
  switch (family.kind()) {
    case LinkKind::Logistic:
      return "logit";
    case LinkKind::GumbelMin:
      return "cloglog";
    case LinkKind::StandardNormal:
      return "probit";
    case LinkKind::Cauchy:
      return "cauchit";
    default:
      return family.tag();
  }
}

std::string ConvergenceReport::to_csv() const {
  std::string out = "m,poisson_alpha,poisson_beta";
  for (const auto& link : links) {
    const std::string name = link_display_name(link);
    out += "," + name + "_alpha," + name + "_beta," + name + "_dalpha," +
           name + "_dbeta";
  }
  out += "\n";
  for (const auto& row : rows) {
    out += std::to_string(row.m) + "," + format_cell(row.poisson, "%.17g");
    for (const auto& cell : row.glm) {
      out += "," + format_cell(cell, "%.17g");
      if (cell.ok && row.poisson.ok) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g",
                      cell.alpha - row.poisson.alpha,
                      cell.beta - row.poisson.beta);
        out += buf;
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  return out;
}

std::string ConvergenceReport::to_text() const {
  // aligned table in the reference experiment layout
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-9s %-17s", "m", "Poisson process");
  out += buf;
  for (const auto& link : links) {
    std::snprintf(buf, sizeof(buf), " %-17s", link_display_name(link).c_str());
    out += buf;
  }
  out += "\n";
  std::snprintf(buf, sizeof(buf), "%-9s %-8s %-8s", "", "alpha", "beta");
  out += buf;
  for (std::size_t k = 0; k < links.size(); ++k) {
    std::snprintf(buf, sizeof(buf), " %-8s %-8s", "alpha", "beta");
    out += buf;
  }
  out += "\n";
  for (const auto& row : rows) {
    std::string m_label;
    const double lg = std::log10(static_cast<double>(row.m));
    if (std::abs(lg - std::round(lg)) < 1e-12)
      m_label = "10^" + std::to_string(static_cast<int>(std::round(lg)));
    else
      m_label = std::to_string(row.m);
    std::snprintf(buf, sizeof(buf), "%-9s", m_label.c_str());
    out += buf;
    const auto emit = [&](const TableCell& cell) {
      if (cell.ok)
        std::snprintf(buf, sizeof(buf), " %-8.4f %-8.4f", cell.alpha,
                      cell.beta);
      else
        std::snprintf(buf, sizeof(buf), " %-17s",
                      cell.note.empty() ? "divergent" : cell.note.c_str());
      out += buf;
    };
    emit(row.poisson);
    for (const auto& cell : row.glm) emit(cell);
    out += "\n";
  }
  return out;
}

ConvergenceReport run_convergence_experiment(
    double q, const std::vector<LinkFamily>& links, const GridSampleSpec& spec,
    const std::vector<std::int64_t>& m_list, double kappa, FVariant variant) {
  ConvergenceReport report;
  report.q = q;
  report.kappa = kappa;
  report.n = spec.n;
  report.links = links;
  for (const auto& link : links) {
    const double link_q = normalizing_sequence(link, 2).q;
    if (link_q != q)
      throw ConfigError("link '" + link.tag() + "' has tail index " +
                        std::to_string(link_q) + ", experiment has q = " +
                        std::to_string(q));
  }

  std::vector<std::int64_t> ms = m_list;
  std::sort(ms.begin(), ms.end());
  for (const std::int64_t m : ms) {
    GridSampleSpec row_spec{spec.n, static_cast<Eigen::Index>(m)};
    const BinaryDataset data = generate_grid_sample(row_spec);

    ConvergenceRow row;
    row.m = m;

    // base measure: empirical distribution of the covariates
    Eigen::MatrixXd base;
    if (variant == FVariant::AllCovariates) {
      base = data.X;
    } else {
      base.resize(data.rows() - data.positives(), data.cols());
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (data.y[i] == 0) base.row(r++) = data.X.row(i);
    }
    const CovariateDistribution dist = empirical_distribution(base);

    EventSample events{Eigen::MatrixXd(data.positives(), data.cols())};
    {
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (data.y[i] != 0) events.points.row(r++) = data.X.row(i);
    }

    try {
      AdditiveSmoothingOptions options;
      options.validate_membership = variant == FVariant::AllCovariates;
      const PointProcessFit fit =
          fit_additive_smoothing(q, dist, events, kappa, options);
      row.poisson = {fit.model.alpha, fit.model.beta[0], true, ""};
    } catch (const DivergenceError&) {
      row.poisson = {0.0, 0.0, false, "divergent"};
    }

    std::optional<GlmPenalty> glm_penalty;
    if (kappa > 0.0) glm_penalty = GlmPenalty{kappa};
    for (const auto& link : links) {
      TableCell cell;
      try {
        const GlmFit fit = fit_glm(data, link, glm_penalty);
        const NormalizedCoefficients norm = normalize_coefficients(
            fit.coefficients, normalizing_sequence(link, m));
        cell = {norm.alpha, norm.beta[0], true, ""};
      } catch (const SeparationError&) {
        cell = {0.0, 0.0, false, "divergent"};
      }
      row.glm.push_back(cell);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace qef
