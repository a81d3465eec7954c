// Experiment CLI: deformed-exponential-family regression and Poisson
// point-process fitting.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 fit divergence.

#include "qef/data.hpp"
#include "qef/errors.hpp"
#include "qef/evt.hpp"
#include "qef/glm.hpp"
#include "qef/links.hpp"
#include "qef/ppp.hpp"
#include "qef/simlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    qef::write_file_atomic(out_path, text);
  }
}

qef::LinkFamily parse_link(const std::string& tag) {
  return qef::LinkFamily::parse(tag);
}

std::vector<qef::LinkFamily> parse_links(const std::vector<std::string>& tags) {
  std::vector<qef::LinkFamily> links;
  for (const auto& tag : tags) links.push_back(parse_link(tag));
  return links;
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw qef::ConfigError("file does not exist: " + path);
}

Eigen::VectorXd to_vector(const std::vector<double>& values,
                          Eigen::Index expected, const char* what) {
  if (values.empty()) return Eigen::VectorXd::Zero(expected);
  if (static_cast<Eigen::Index>(values.size()) != expected)
    throw qef::ConfigError(std::string(what) + ": expected " +
                           std::to_string(expected) + " values, got " +
                           std::to_string(values.size()));
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i)
    v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

json fit_glm_json(const qef::GlmFit& fit, const qef::LinkFamily& link,
                  std::int64_t m) {
  json out;
  out["link"] = link.tag();
  out["a"] = fit.coefficients.a;
  out["b"] = std::vector<double>(
      fit.coefficients.b.data(),
      fit.coefficients.b.data() + fit.coefficients.b.size());
  out["log_likelihood"] = fit.log_likelihood;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["gradient_norm"] = fit.gradient_norm;
  if (m >= 2) {
    const qef::NormalizingTriple triple = qef::normalizing_sequence(link, m);
    const qef::NormalizedCoefficients norm =
        qef::normalize_coefficients(fit.coefficients, triple);
    out["normalized"] = {
        {"alpha", norm.alpha},
        {"beta", std::vector<double>(norm.beta.data(),
                                     norm.beta.data() + norm.beta.size())},
        {"c_m", triple.c},
        {"d_m", triple.d},
        {"q", triple.q}};
  }
  return out;
}

json fit_ppp_json(const qef::PointProcessFit& fit) {
  json out;
  out["q"] = fit.model.q;
  out["kappa"] = fit.kappa;
  out["alpha"] = fit.model.alpha;
  out["beta"] = std::vector<double>(
      fit.model.beta.data(), fit.model.beta.data() + fit.model.beta.size());
  out["total_intensity"] = fit.total_intensity;
  out["objective"] = fit.penalized_objective;
  out["converged"] = fit.converged;
  if (fit.kappa == 0.0)
    out["warning"] =
        "kappa = 0 requests the plain maximum likelihood estimate, which may "
        "not exist";
  return out;
}

struct TableArgs {
  std::string preset;
  double q = 1.0;
  std::vector<std::string> links;
  std::int64_t n = 10;
  std::vector<std::int64_t> m_list;
  double kappa = 0.0;
  std::string f_variant = "all";
  std::string out;
};

int cmd_table(const TableArgs& args) {
  double q = args.q;
  std::vector<qef::LinkFamily> links = parse_links(args.links);
  std::vector<std::int64_t> m_list = args.m_list;
  std::int64_t n = args.n;
  if (!args.preset.empty()) {
    if (args.preset == "table1") {
      q = 1.0;
      links = {qef::LinkFamily::logistic(), qef::LinkFamily::standard_normal(),
               qef::LinkFamily::gumbel_min()};
    } else if (args.preset == "table2") {
      q = 2.0;
      links = {qef::LinkFamily::cauchy()};
    } else {
      throw qef::ConfigError("unknown preset: " + args.preset);
    }
    n = 10;
    m_list = {100, 1000, 10000, 100000};
  }
  if (m_list.empty())
    throw qef::ConfigError("table: no m values given (use --m or --preset)");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1])
      throw qef::ConfigError("table: m list must be strictly increasing");
  if (args.kappa < 0.0) throw qef::ConfigError("table: kappa must be >= 0");
  qef::FVariant variant;
  if (args.f_variant == "all") {
    variant = qef::FVariant::AllCovariates;
  } else if (args.f_variant == "controls") {
    variant = qef::FVariant::ControlsOnly;
  } else {
    throw qef::ConfigError("table: --f-variant must be 'all' or 'controls'");
  }

  const qef::ConvergenceReport report = qef::run_convergence_experiment(
      q, links, {n, 0}, m_list, args.kappa, variant);
  if (args.out.empty()) {
    std::cout << report.to_text();
  } else {
    qef::write_file_atomic(args.out + ".txt", report.to_text());
    qef::write_file_atomic(args.out + ".csv", report.to_csv());
    std::cout << "wrote " << args.out << ".txt and " << args.out << ".csv\n";
  }
  return kExitOk;
}

struct FitGlmArgs {
  std::string data;
  std::string link = "logistic";
  double kappa = 0.0;
  std::string out;
};

int cmd_fit_glm(const FitGlmArgs& args) {
  require_file(args.data);
  if (args.kappa < 0.0) throw qef::ConfigError("fit-glm: kappa must be >= 0");
  const qef::LinkFamily link = parse_link(args.link);
  const qef::BinaryDataset data = qef::load_binary_dataset_csv(args.data);
  std::optional<qef::GlmPenalty> penalty;
  if (args.kappa > 0.0) penalty = qef::GlmPenalty{args.kappa};
  const qef::GlmFit fit = qef::fit_glm(data, link, penalty);
  emit(fit_glm_json(fit, link, data.rows()).dump(2), args.out);
  return kExitOk;
}

struct FitPppArgs {
  std::string dist;
  std::string events;
  double q = 1.0;
  double kappa = 1.0;  // additive smoothing default; (0, 1] is the
                       // admissibility range
  std::string out;
};

int cmd_fit_ppp(const FitPppArgs& args) {
  require_file(args.dist);
  require_file(args.events);
  if (args.kappa < 0.0) throw qef::ConfigError("fit-ppp: kappa must be >= 0");
  const qef::CovariateDistribution dist = qef::load_distribution_csv(args.dist);
  const qef::EventSample events = qef::load_events_csv(args.events);
  const qef::PointProcessFit fit =
      qef::fit_additive_smoothing(args.q, dist, events, args.kappa);
  emit(fit_ppp_json(fit).dump(2), args.out);
  return kExitOk;
}

struct VerifyGevArgs {
  std::string link = "logistic";
  double m = 1e6;
  std::vector<double> z = {-1.0, 0.0, 1.0};
  std::string out;
};

int cmd_verify_gev(const VerifyGevArgs& args) {
  const qef::LinkFamily link = parse_link(args.link);
  if (args.m < 2 || args.m != std::floor(args.m))
    throw qef::ConfigError("verify gev: m must be an integer >= 2");
  const auto m = static_cast<std::int64_t>(args.m);
  Eigen::VectorXd grid(static_cast<Eigen::Index>(args.z.size()));
  for (std::size_t i = 0; i < args.z.size(); ++i)
    grid[static_cast<Eigen::Index>(i)] = args.z[i];
  const qef::NormalizingTriple triple = qef::normalizing_sequence(link, m);
  const Eigen::VectorXd residuals = qef::verify_gev(link, m, grid);
  json out;
  out["link"] = link.tag();
  out["m"] = m;
  out["q"] = triple.q;
  out["c_m"] = triple.c;
  out["d_m"] = triple.d;
  out["residuals"] = json::array();
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    out["residuals"].push_back({{"z", grid[i]}, {"residual", residuals[i]}});
  emit(out.dump(2), args.out);
  return kExitOk;
}

struct VerifyPoissonArgs {
  std::string link = "logistic";
  std::string dist;
  double alpha = 0.0;
  std::vector<double> beta;
  double m = 1e5;
  std::int64_t replications = 100000;
  std::uint64_t seed = 1;
  std::string regions;  // "0,1;2,3"
  std::string out;
};

qef::RegionPartition parse_regions(const std::string& spec,
                                   Eigen::Index support_size) {
  if (spec.empty()) return qef::RegionPartition::halves(support_size);
  qef::RegionPartition partition;
  std::vector<Eigen::Index> current;
  std::string token;
  for (const char c : spec + ";") {
    if (c == ',' || c == ';') {
      if (!token.empty()) {
        current.push_back(static_cast<Eigen::Index>(std::stoll(token)));
        token.clear();
      }
      if (c == ';' && !current.empty()) {
        partition.regions.push_back(current);
        current.clear();
      }
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      token += c;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw qef::ConfigError("bad region spec: '" + spec + "'");
    }
  }
  return partition;
}

int cmd_verify_poisson(const VerifyPoissonArgs& args) {
  const qef::LinkFamily link = parse_link(args.link);
  if (args.m < 2 || args.m != std::floor(args.m))
    throw qef::ConfigError("verify poisson: m must be an integer >= 2");
  std::optional<qef::CovariateDistribution> dist;
  if (args.dist.empty()) {
    // default base measure: uniform on {-1, -1/3, 1/3, 1}
    Eigen::MatrixXd support(4, 1);
    support << -1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0;
    dist.emplace(support, Eigen::VectorXd::Constant(4, 0.25));
  } else {
    require_file(args.dist);
    dist.emplace(qef::load_distribution_csv(args.dist));
  }
  const Eigen::VectorXd beta = to_vector(args.beta, dist->dim(), "--beta");
  const qef::RegionPartition partition =
      parse_regions(args.regions, dist->size());
  const qef::PoissonLimitReport report = qef::verify_poisson_limit(
      link, *dist, args.alpha, beta, partition,
      static_cast<std::int64_t>(args.m), args.replications, args.seed);
  json out;
  out["link"] = link.tag();
  out["m"] = report.m;
  out["replications"] = report.replications;
  out["seed"] = report.seed;
  out["regions"] = json::array();
  for (const auto& region : report.regions) {
    json r;
    r["indices"] = region.indices;
    r["lambda"] = region.lambda;
    r["tv_distance"] = region.tv_distance;
    r["empirical_pmf"] = region.empirical_pmf;
    r["poisson_pmf"] = region.poisson_pmf;
    out["regions"].push_back(r);
  }
  json corr = json::array();
  for (Eigen::Index r = 0; r < report.correlation.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.correlation.cols(); ++c)
      row.push_back(report.correlation(r, c));
    corr.push_back(row);
  }
  out["correlation"] = corr;
  emit(out.dump(2), args.out);
  return kExitOk;
}

struct SimulateArgs {
  std::string link = "logistic";
  std::string dist;
  double alpha = 0.0;
  std::vector<double> beta;
  double m = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  const qef::LinkFamily link = parse_link(args.link);
  if (args.m < 2 || args.m != std::floor(args.m))
    throw qef::ConfigError("simulate: m must be an integer >= 2");
  require_file(args.dist);
  const qef::CovariateDistribution dist = qef::load_distribution_csv(args.dist);
  const Eigen::VectorXd beta = to_vector(args.beta, dist.dim(), "--beta");
  const qef::BinaryDataset data =
      qef::simulate_imbalanced(link, dist, args.alpha, beta,
                               static_cast<std::int64_t>(args.m), args.seed);
  if (args.out.empty())
    throw qef::ConfigError("simulate: --out is required");
  qef::save_binary_dataset_csv(data, args.out);
  std::cout << "wrote " << args.out << " (" << data.positives()
            << " positives of " << data.rows() << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qexpfam: imbalanced binomial regression, q-exponential families, and "
      "the limiting Poisson point process"};
  app.set_config("--config", "", "read options from a TOML/INI config file");
  app.require_subcommand(1);

  TableArgs table_args;
  auto* table = app.add_subcommand(
      "table", "convergence experiment table (binomial fits vs point process)");
  table->add_option("--preset", table_args.preset,
                    "table1 (q=1: logit/probit/cloglog) or table2 (q=2: "
                    "cauchit); n=10, m=10^2..10^5");
  table->add_option("--q", table_args.q, "tail index of the experiment");
  table->add_option("--links", table_args.links, "link tags")->delimiter(',');
  table->add_option("--n", table_args.n, "number of positives");
  table->add_option("--m", table_args.m_list, "sample sizes (increasing)")
      ->delimiter(',');
  table->add_option("--kappa", table_args.kappa,
                    "additive-smoothing weight (0 = plain MLE)");
  table->add_option("--f-variant", table_args.f_variant,
                    "base measure: 'all' covariates or 'controls' only");
  table->add_option("--out", table_args.out, "output path prefix");

  FitGlmArgs glm_args;
  auto* fit_glm_cmd =
      app.add_subcommand("fit-glm", "fit the binomial regression model");
  fit_glm_cmd->add_option("--data", glm_args.data, "dataset CSV (label 'y')")
      ->required();
  fit_glm_cmd->add_option("--link", glm_args.link, "link tag");
  fit_glm_cmd->add_option("--kappa", glm_args.kappa,
                          "penalized fit weight (0 = plain MLE)");
  fit_glm_cmd->add_option("--out", glm_args.out, "output JSON path");

  FitPppArgs ppp_args;
  auto* fit_ppp = app.add_subcommand(
      "fit-ppp", "fit the q-exponential point-process intensity");
  fit_ppp->add_option("--dist", ppp_args.dist,
                      "covariate distribution CSV (trailing 'weight' column)")
      ->required();
  fit_ppp->add_option("--events", ppp_args.events, "event rows CSV")
      ->required();
  fit_ppp->add_option("--q", ppp_args.q, "deformation index");
  fit_ppp->add_option("--kappa", ppp_args.kappa,
                      "additive-smoothing weight (default 1; 0 = plain MLE)");
  fit_ppp->add_option("--out", ppp_args.out, "output JSON path");

  auto* verify = app.add_subcommand("verify", "numerical verification");
  verify->require_subcommand(1);
  VerifyGevArgs gev_args;
  auto* gev = verify->add_subcommand(
      "gev", "residuals of m G(c_m + d_m z) against exp_q(z)");
  gev->add_option("--link", gev_args.link, "link tag");
  gev->add_option("--m", gev_args.m, "sample size");
  gev->add_option("--z", gev_args.z, "z grid")->delimiter(',');
  gev->add_option("--out", gev_args.out, "output JSON path");

  VerifyPoissonArgs poisson_args;
  auto* poisson = verify->add_subcommand(
      "poisson", "Monte Carlo check of the Poisson point-process limit");
  poisson->add_option("--link", poisson_args.link, "link tag");
  poisson->add_option("--dist", poisson_args.dist,
                      "covariate distribution CSV (default: 4-point uniform)");
  poisson->add_option("--alpha", poisson_args.alpha, "intercept");
  poisson->add_option("--beta", poisson_args.beta, "slope(s)")->delimiter(',');
  poisson->add_option("--m", poisson_args.m, "sample size per replication");
  poisson->add_option("--reps", poisson_args.replications, "replications");
  poisson->add_option("--seed", poisson_args.seed, "RNG seed");
  poisson->add_option("--regions", poisson_args.regions,
                      "support-index regions, e.g. '0,1;2,3' (default halves)");
  poisson->add_option("--out", poisson_args.out, "output JSON path");

  SimulateArgs sim_args;
  auto* simulate =
      app.add_subcommand("simulate", "draw an imbalanced dataset from the model");
  simulate->add_option("--link", sim_args.link, "link tag");
  simulate->add_option("--dist", sim_args.dist, "covariate distribution CSV")
      ->required();
  simulate->add_option("--alpha", sim_args.alpha, "intercept (limit scale)");
  simulate->add_option("--beta", sim_args.beta, "slope(s) (limit scale)")
      ->delimiter(',');
  simulate->add_option("--m", sim_args.m, "rows to draw");
  simulate->add_option("--seed", sim_args.seed, "RNG seed");
  simulate->add_option("--out", sim_args.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (table->parsed()) return cmd_table(table_args);
    if (fit_glm_cmd->parsed()) return cmd_fit_glm(glm_args);
    if (fit_ppp->parsed()) return cmd_fit_ppp(ppp_args);
    if (verify->parsed()) {
      if (gev->parsed()) return cmd_verify_gev(gev_args);
      if (poisson->parsed()) return cmd_verify_poisson(poisson_args);
    }
    if (simulate->parsed()) return cmd_simulate(sim_args);
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const qef::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qef::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const qef::SeparationError& e) {
    std::cerr << "fit divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const qef::DivergenceError& e) {
    std::cerr << "fit divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
