#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <cstdint>
#include <random>
#include <string>

namespace gcvar::testing {

/// Random symmetric positive definite matrix with unit diagonal and a
/// smallest eigenvalue bounded away from zero.
inline Eigen::MatrixXd random_correlation(Eigen::Index d, std::uint64_t seed, double ridge = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd b(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) b(i, j) = z(rng);
  Eigen::MatrixXd m = b * b.transpose() / static_cast<double>(d) + ridge * Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd s = m.diagonal().cwiseSqrt().cwiseInverse();
  m = s.asDiagonal() * m * s.asDiagonal();
  return (m + m.transpose()) / 2.0;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gcvar_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = {}) const {
    return child.empty() ? path_.string() : (path_ / child).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace gcvar::testing
