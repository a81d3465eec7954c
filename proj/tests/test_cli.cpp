#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kCli = QEXPFAM_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string output;  // stdout only
};

RunResult run(const std::string& args) {
  const fs::path out_file =
      fs::temp_directory_path() / ("qef_cli_out_" + std::to_string(rand()));
  const std::string cmd = kCli + " " + args + " > " + out_file.string() +
                          " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(out_file);
  return {WEXITSTATUS(status), ss.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_temp(const std::string& name, const std::string& contents) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("help and config errors") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);
  CHECK(run("table --preset table9").exit_code == 2);
  CHECK(run("table --q 1 --links weibull --m 100").exit_code == 2);
  CHECK(run("table --q 1 --links logit --m 1000,100").exit_code == 2);
  CHECK(run("fit-glm --data /does/not/exist.csv").exit_code == 2);
  CHECK(run("verify gev --link logistic --m 1").exit_code == 2);
  // z where exp_q is infinite violates the residual precondition
  CHECK(run("verify gev --link cauchit --m 100 --z 1").exit_code == 2);
}

TEST_CASE("single-cell table run") {
  const RunResult res = run("table --q 1 --links logit --n 10 --m 100");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("Poisson process") != std::string::npos);
  CHECK(res.output.find("logit") != std::string::npos);
  CHECK(res.output.find("1.650") != std::string::npos);
  CHECK(res.output.find("1.688") != std::string::npos);
}

TEST_CASE("table presets reproduce the reference rows") {
  const RunResult t1 = run("table --preset table1");
  CHECK(t1.exit_code == 0);
  // m = 1e5 Poisson-process row
  CHECK(t1.output.find("1.6254") != std::string::npos);
  CHECK(t1.output.find("1.2299") != std::string::npos);
  CHECK(t1.output.find("probit") != std::string::npos);

  const RunResult t2 = run("table --preset table2");
  CHECK(t2.exit_code == 0);
  // m = 1e5 cauchit row
  CHECK(t2.output.find("0.8622") != std::string::npos);
  CHECK(t2.output.find("0.0679") != std::string::npos);
}

TEST_CASE("table preset output files are byte-identical across runs") {
  const fs::path prefix1 = fs::temp_directory_path() / "qef_tbl_a";
  const fs::path prefix2 = fs::temp_directory_path() / "qef_tbl_b";
  // small custom table to keep the test fast
  const std::string args = "table --q 1 --links logit,cloglog --n 10 --m 100,1000 --out ";
  CHECK(run(args + prefix1.string()).exit_code == 0);
  CHECK(run(args + prefix2.string()).exit_code == 0);
  const std::string csv1 = slurp(prefix1.string() + ".csv");
  CHECK(csv1 == slurp(prefix2.string() + ".csv"));
  CHECK(slurp(prefix1.string() + ".txt") == slurp(prefix2.string() + ".txt"));
  CHECK(csv1.find("m,poisson_alpha") == 0);
}

TEST_CASE("fit-ppp reproduces the two-point closed form") {
  const auto dist = write_temp("qef_cli_dist.csv", "x1,weight\n0,0.5\n1,0.5\n");
  const auto events =
      write_temp("qef_cli_events.csv", "x1\n0\n0\n0\n");  // n_0=3, n_1=0
  const RunResult res = run("fit-ppp --dist " + dist.string() + " --events " +
                            events.string() + " --q 1 --kappa 0.5");
  CHECK(res.exit_code == 0);
  // lambda_0 = n_0 + kappa p_0 = 3.25, lambda_1 = 0.25; with p = (0.5, 0.5):
  // exp(alpha) = 6.5, so alpha = 1.87180...
  CHECK(res.output.find("\"alpha\": 1.8718") != std::string::npos);
  CHECK(res.output.find("\"converged\": true") != std::string::npos);
  CHECK(res.output.find("\"total_intensity\": 3.5") != std::string::npos);
}

TEST_CASE("fit-ppp with empty events and kappa > 0 converges") {
  const auto dist = write_temp("qef_cli_dist2.csv", "x1,weight\n0,0.5\n1,0.5\n");
  const auto events = write_temp("qef_cli_events_none.csv", "x1\n");
  const RunResult res = run("fit-ppp --dist " + dist.string() + " --events " +
                            events.string() + " --q 0.5 --kappa 1");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("fit-ppp divergence exit code on the Example-2 failure case") {
  const auto dist = write_temp(
      "qef_cli_dist3.csv",
      "x1,weight\n0,0.333333333333333333\n1,0.333333333333333333\n2,"
      "0.333333333333333334\n");
  const auto events = write_temp("qef_cli_events3.csv", "x1\n1\n2\n2\n");
  const RunResult res = run("fit-ppp --dist " + dist.string() + " --events " +
                            events.string() + " --q 0 --kappa 0");
  CHECK(res.exit_code == 4);
}

TEST_CASE("fit-glm on a CSV dataset emits normalized coefficients") {
  std::string csv = "x1,y\n";
  for (int i = 1; i <= 10; ++i)
    csv += std::to_string(0.4 + 0.4 * (i - 1) / 9.0) + ",1\n";
  for (int i = 0; i < 90; ++i)
    csv += std::to_string(i / 89.0) + ",0\n";
  const auto data = write_temp("qef_cli_glm.csv", csv);
  const RunResult res =
      run("fit-glm --data " + data.string() + " --link logit");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("\"converged\": true") != std::string::npos);
  CHECK(res.output.find("\"normalized\"") != std::string::npos);

  // single-class data: data error exit code
  const auto ones = write_temp("qef_cli_ones.csv", "x1,y\n0,1\n1,1\n");
  CHECK(run("fit-glm --data " + ones.string()).exit_code == 3);
}

TEST_CASE("verify gev JSON and reproducibility") {
  const RunResult res =
      run("verify gev --link logistic --m 1000000 --z 0 --out " +
          (fs::temp_directory_path() / "qef_gev.json").string());
  CHECK(res.exit_code == 0);
  const std::string json = slurp(fs::temp_directory_path() / "qef_gev.json");
  CHECK(json.find("\"residual\"") != std::string::npos);
  // residual at z = 0 is -1/(m+1), about -1e-6
  CHECK(json.find("-9.9999") != std::string::npos);

  // probit residuals visibly larger than logistic at matched m
  const RunResult probit = run("verify gev --link probit --m 1000000 --z 0");
  CHECK(probit.exit_code == 0);
  const auto grab = [](const std::string& s) {
    const auto pos = s.find("\"residual\": ");
    return std::abs(std::stod(s.substr(pos + 12)));
  };
  const RunResult logistic = run("verify gev --link logistic --m 1000000 --z 0");
  CHECK(grab(probit.output) > 100.0 * grab(logistic.output));
}

TEST_CASE("verify poisson is deterministic given a seed") {
  const std::string args =
      "verify poisson --link logistic --m 1000 --reps 2000 --seed 7";
  const RunResult a = run(args);
  const RunResult b = run(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("tv_distance") != std::string::npos);
  const RunResult c = run(
      "verify poisson --link logistic --m 1000 --reps 2000 --seed 8");
  CHECK(c.output != a.output);
}

TEST_CASE("simulate writes a loadable dataset deterministically") {
  const auto dist = write_temp("qef_cli_sim_dist.csv",
                               "x1,weight\n-1,0.25\n0,0.5\n1,0.25\n");
  const auto out1 = fs::temp_directory_path() / "qef_sim1.csv";
  const auto out2 = fs::temp_directory_path() / "qef_sim2.csv";
  const std::string base = "simulate --link logistic --dist " + dist.string() +
                           " --alpha 0.5 --beta 1 --m 500 --seed 3 --out ";
  CHECK(run(base + out1.string()).exit_code == 0);
  CHECK(run(base + out2.string()).exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1).find("x1,y\n") == 0);
}

TEST_CASE("config file supplies defaults, flags override") {
  const auto config = write_temp("qef_cli.toml",
                                 "[verify.gev]\nlink=\"logistic\"\nm=1000\n");
  const RunResult res =
      run("--config " + config.string() + " verify gev --z 0");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("\"m\": 1000") != std::string::npos);
  const RunResult override_res =
      run("--config " + config.string() + " verify gev --z 0 --m 100");
  CHECK(override_res.exit_code == 0);
  CHECK(override_res.output.find("\"m\": 100") != std::string::npos);
}
