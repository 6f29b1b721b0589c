#pragma once

#include "gcvar/pc_dag.hpp"
#include "gcvar/rank_scaling.hpp"
#include "gcvar/sparse_precision.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gcvar {

enum class Structure { chain, common_cause, v_structure, diamond1, diamond2, independent };

std::string_view to_string(Structure s);
Structure parse_structure(std::string_view name);
Index cluster_size(Structure s);

struct SimDesign {
  Structure structure = Structure::v_structure;
  double a = 0.25;
  Index clusters = 3;
  Index n = 5000;
  std::uint64_t seed = 1;
  int burn_in = 500;
  /// Optional strictly increasing map applied to every generated value.
  std::function<double(double)> transform;
};

struct SimTruth {
  Eigen::MatrixXd a;
  Eigen::MatrixXd sigma_eps;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd theta11;
  Cpdag reference;
};

/// Unit-weight impact matrix (I - D)^{-1} of one cluster. Nodes are labelled
/// so that 1 -> 3 <- 2 is the v-structure; the common cause is node 2.
Eigen::MatrixXd structure_h(Structure s);

/// Lower triangular matrix with every entry (diagonal included) equal to a.
Eigen::MatrixXd cluster_autoregression(Structure s, double a);

/// Per-cluster VAR(1) driven by H e_t, standardized by the analytic
/// stationary standard deviations, stacked block-diagonally.
std::pair<Panel, SimTruth> generate_cluster_var(const SimDesign& design);

/// PC at level 1 - 1e-13 with plug-in n = 10^6 on the population
/// innovation covariance of one cluster.
Cpdag reference_cpdag(Structure s);

/// Disjoint union of `clusters` copies of reference_cpdag(s).
Cpdag block_reference_cpdag(Structure s, Index clusters);

/// Number of unordered pairs whose edge type differs.
int shd(const Cpdag& g1, const Cpdag& g2);

struct SupportConfusion {
  int tp_fp = 0;
  int fp = 0;
  int fn = 0;
};

/// Off-diagonal counts; an entry is nonzero when |value| > tol.
SupportConfusion support_confusion(const Eigen::MatrixXd& theta11_hat,
                                   const Eigen::MatrixXd& theta11_true, double tol = 1e-6);
/// Same counts with the estimated nonzero pattern given directly.
SupportConfusion support_confusion(const BoolMatrix& estimated, const Eigen::MatrixXd& theta11_true,
                                   double tol = 1e-6);

enum class BenchmarkVariant {
  full,        // sparse precision + PC on sigma_eps
  dense,       // lambda = 0, tau = 0
  independent  // PC on the rank correlation of X_t alone (A = 0)
};

std::string_view to_string(BenchmarkVariant v);
BenchmarkVariant parse_variant(std::string_view name);

struct LambdaPolicy {
  enum class Kind { cv, fixed, two_sample_average } kind = Kind::cv;
  double value = 0.0;          // fixed lambda
  double cv_multiplier = 1.0;  // lambda_CV / 2, lambda_CV / 4, ...
};

struct BenchmarkConfig {
  SimDesign design;
  Method method = Method::lasso;
  BenchmarkVariant variant = BenchmarkVariant::full;
  LambdaPolicy lambda;
  int reps = 50;
  double alpha = 0.01;
  bool restricted_pc = true;
};

struct Metric {
  double mean = 0.0;
  double std_error = 0.0;
  bool available = false;
};

struct BenchmarkReplicate {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int shd = 0;
  SupportConfusion confusion;
  double a_distance = 0.0;
  double sigma_distance = 0.0;
};

struct BenchmarkRow {
  BenchmarkConfig config;
  std::vector<BenchmarkReplicate> replicates;
  Metric shd, tp_fp, fp, fn, a_distance, sigma_distance, lambda;
};

/// Replication r uses seed design.seed + r.
BenchmarkRow run_benchmark(const BenchmarkConfig& config);

std::string benchmark_csv_header();
std::string benchmark_csv_row(const BenchmarkRow& row);
nlohmann::json to_json(const BenchmarkRow& row);

}  // namespace gcvar
