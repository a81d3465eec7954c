#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace qef {

// Binary regression input: m x p covariates and labels in {0,1}.
struct BinaryDataset {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  Eigen::Index positives() const { return y.sum(); }
  bool has_both_classes() const;
};

// Finite covariate distribution: distinct support rows xi_j with positive
// weights summing to one, the support not contained in any hyperplane.
class CovariateDistribution {
 public:
  CovariateDistribution(Eigen::MatrixXd support, Eigen::VectorXd weights);

  const Eigen::MatrixXd& support() const { return support_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return support_.rows(); }
  Eigen::Index dim() const { return support_.cols(); }
  Eigen::VectorXd mean() const;

 private:
  Eigen::MatrixXd support_;
  Eigen::VectorXd weights_;
};

// Observed event locations; each row must belong to the support of the
// companion distribution (checked by validate_events).
struct EventSample {
  Eigen::MatrixXd points;

  Eigen::Index size() const { return points.rows(); }
  static EventSample empty(Eigen::Index dim) {
    return {Eigen::MatrixXd(0, dim)};
  }
};

// Componentwise match of each event row to a support row within tol;
// returns the support index per event, throws DataError on a miss.
std::vector<Eigen::Index> validate_events(const CovariateDistribution& dist,
                                          const EventSample& sample,
                                          double tol = 1e-9);

// Empirical distribution of a covariate matrix: groups bit-identical rows.
CovariateDistribution empirical_distribution(const Eigen::MatrixXd& X);

// --- CSV interfaces (comma-separated, header row, UTF-8, '.' decimals) ---

// Label column named "y" with 0/1 values; remaining numeric columns are
// covariates in file order.
BinaryDataset load_binary_dataset_csv(const std::filesystem::path& path);
void save_binary_dataset_csv(const BinaryDataset& data,
                             const std::filesystem::path& path);

// Covariate columns then a trailing "weight" column.
CovariateDistribution load_distribution_csv(const std::filesystem::path& path);

// Covariate rows only.
EventSample load_events_csv(const std::filesystem::path& path);

// Writes via a temp file and atomic rename so failures never leave partial
// output behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace qef
