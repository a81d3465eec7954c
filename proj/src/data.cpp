#include "qef/data.hpp"

#include "qef/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qef {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const std::filesystem::path& path,
                    std::size_t line_no) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(path.string() + ":" + std::to_string(line_no) +
                    ": not a number: '" + raw + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (table.header.empty()) {
      for (auto& f : split_csv_line(line)) table.header.push_back(trim(f));
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(table.header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw DataError(path.string() + ": empty CSV");
  return table;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool BinaryDataset::has_both_classes() const {
  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y[i] != 0 ? any1 : any0) = true;
  return any0 && any1;
}

CovariateDistribution::CovariateDistribution(Eigen::MatrixXd support,
                                             Eigen::VectorXd weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  const Eigen::Index J = support_.rows();
  const Eigen::Index p = support_.cols();
  if (J == 0 || p == 0)
    throw DataError("covariate distribution: empty support");
  if (weights_.size() != J)
    throw DataError("covariate distribution: weight/support size mismatch");
  if ((weights_.array() <= 0.0).any())
    throw DataError("covariate distribution: weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw DataError("covariate distribution: weights must sum to 1");

  // distinct support rows (lexicographic sort over row indices)
  std::vector<Eigen::Index> order(static_cast<std::size_t>(J));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < p; ++k) {
      if (support_(a, k) != support_(b, k))
        return support_(a, k) < support_(b, k);
    }
    return false;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (support_.row(order[i]) == support_.row(order[i - 1]))
      throw DataError("covariate distribution: duplicate support point");
  }

  // Assumption: the support spans R^p affinely (rank of the centered
  // support equals p), otherwise the model is rank-deficient.
  Eigen::MatrixXd centered =
      support_.rowwise() - support_.colwise().mean();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw DataError("covariate distribution: support is contained in a "
                    "hyperplane (affine rank " +
                    std::to_string(qr.rank()) + " < " + std::to_string(p) +
                    ")");
}

Eigen::VectorXd CovariateDistribution::mean() const {
  return support_.transpose() * weights_;
}

std::vector<Eigen::Index> validate_events(const CovariateDistribution& dist,
                                          const EventSample& sample,
                                          double tol) {
  if (sample.points.cols() != dist.dim())
    throw DataError("event sample dimension " +
                    std::to_string(sample.points.cols()) +
                    " does not match support dimension " +
                    std::to_string(dist.dim()));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(sample.size()));
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    Eigen::Index found = -1;
    for (Eigen::Index j = 0; j < dist.size(); ++j) {
      if (((sample.points.row(i) - dist.support().row(j)).cwiseAbs().array() <=
           tol)
              .all()) {
        found = j;
        break;
      }
    }
    if (found < 0)
      throw DataError("event row " + std::to_string(i) +
                      " does not belong to the support of F");
    idx[static_cast<std::size_t>(i)] = found;
  }
  return idx;
}

CovariateDistribution empirical_distribution(const Eigen::MatrixXd& X) {
  const Eigen::Index m = X.rows(), p = X.cols();
  if (m == 0) throw DataError("empirical_distribution: no rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < p; ++k)
      if (X(a, k) != X(b, k)) return X(a, k) < X(b, k);
    return false;
  });
  std::vector<Eigen::Index> reps;
  std::vector<double> counts;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (i > 0 && X.row(order[i]) == X.row(order[i - 1])) {
      counts.back() += 1.0;
    } else {
      reps.push_back(order[i]);
      counts.push_back(1.0);
    }
  }
  const Eigen::Index J = static_cast<Eigen::Index>(reps.size());
  Eigen::MatrixXd support(J, p);
  Eigen::VectorXd weights(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    support.row(j) = X.row(reps[static_cast<std::size_t>(j)]);
    weights[j] = counts[static_cast<std::size_t>(j)] / static_cast<double>(m);
  }
  return CovariateDistribution(std::move(support), std::move(weights));
}

BinaryDataset load_binary_dataset_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  Eigen::Index y_col = -1;
  for (std::size_t k = 0; k < table.header.size(); ++k)
    if (table.header[k] == "y") y_col = static_cast<Eigen::Index>(k);
  if (y_col < 0) throw DataError(path.string() + ": no 'y' column");
  const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 1;
  if (p < 1) throw DataError(path.string() + ": no covariate columns");
  const Eigen::Index m = static_cast<Eigen::Index>(table.rows.size());
  if (m < 1) throw DataError(path.string() + ": no data rows");
  BinaryDataset data;
  data.X.resize(m, p);
  data.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(table.header.size());
         ++k) {
      const double v = table.rows[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(k)];
      if (k == y_col) {
        if (v != 0.0 && v != 1.0)
          throw DataError(path.string() + ": label must be 0 or 1, got " +
                          format_double(v));
        data.y[i] = static_cast<int>(v);
      } else {
        data.X(i, c++) = v;
      }
    }
  }
  return data;
}

void save_binary_dataset_csv(const BinaryDataset& data,
                             const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index k = 0; k < data.cols(); ++k)
    out += "x" + std::to_string(k + 1) + ",";
  out += "y\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.cols(); ++k)
      out += format_double(data.X(i, k)) + ",";
    out += std::to_string(data.y[i]) + "\n";
  }
  write_file_atomic(path, out);
}

CovariateDistribution load_distribution_csv(
    const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.back() != "weight")
    throw DataError(path.string() + ": last column must be 'weight'");
  const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 1;
  if (p < 1) throw DataError(path.string() + ": no covariate columns");
  const Eigen::Index J = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd support(J, p);
  Eigen::VectorXd weights(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < p; ++k)
      support(j, k) = table.rows[static_cast<std::size_t>(j)]
                                [static_cast<std::size_t>(k)];
    weights[j] =
        table.rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)];
  }
  return CovariateDistribution(std::move(support), std::move(weights));
}

EventSample load_events_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const Eigen::Index p = static_cast<Eigen::Index>(table.header.size());
  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd points(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p; ++k)
      points(i, k) =
          table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  return {std::move(points)};
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qef
