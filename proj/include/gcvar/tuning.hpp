#pragma once

#include "gcvar/rank_scaling.hpp"
#include "gcvar/sparse_precision.hpp"

#include <json.hpp>

#include <vector>

namespace gcvar {

/// Tr(S_test Theta) - ln det(Theta). Throws NumericalError("invalid precision
/// for scoring") unless theta is positive definite.
double cv_score(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& sigma_test);

/// Tr(S_test Theta) - ln|det(Theta)|; +inf when theta is singular or not finite.
double cv_score_abs_det(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& sigma_test);

struct LambdaSearchOptions {
  double start = 0.10;
  double zero_tol = 1e-6;
  int max_steps = 30;
};

/// Smallest lambda on the grid 0.10 * 2^{+-j} at which every off-diagonal
/// entry of theta11 is below 1e-6 in absolute value (tau = 2 lambda).
/// Halves from 0.10 while the condition holds; doubles first when it does not.
double lambda_zero_search(const ScalingMatrix& sigma, Method method,
                          const LambdaSearchOptions& options = {});
double lambda_zero_search(const Panel& panel, int lags, Method method,
                          const LambdaSearchOptions& options = {});

/// How cross-validation scores a refit that is not positive definite.
enum class IndefiniteFit {
  abs_determinant,  // score with ln|det|
  reject            // score +inf
};

struct CvPlan {
  int n_folds = 5;
  /// Descending. Empty: lambda_0 / 2, ..., lambda_0 / 2^5.
  std::vector<double> lambda_grid;
  double tau_factor = 2.0;
  int grid_size = 5;
  IndefiniteFit indefinite = IndefiniteFit::abs_determinant;
};

struct CvResult {
  double lambda0 = 0.0;  // zero when the grid was supplied
  std::vector<double> grid;
  Eigen::MatrixXd fold_scores;  // grid x folds; +inf where the fit was not scorable
  std::vector<double> mean_scores;
  double lambda = 0.0;
  double tau = 0.0;
};

nlohmann::json to_json(const CvResult& result);

/// Contiguous equal-size blocks [begin, end); the remainder n mod folds rows
/// at the end belong to every training sample and to no test block.
std::vector<std::pair<Index, Index>> fold_blocks(Index n, int n_folds);

/// Fits on the complement of each block and scores on the block's own
/// scaling matrix; the grid point with the smallest mean score wins (ties go
/// to the larger lambda). Refits that are not positive definite are scored
/// according to plan.indefinite. Throws InputError("fold too small").
CvResult cross_validate(const Panel& panel, int lags, Method method, const CvPlan& plan = {});

struct AicResult {
  std::vector<int> lags;
  std::vector<double> log_det;
  std::vector<int> df;
  std::vector<double> score;
  int selected = 1;
  Index effective_n = 0;
};

nlohmann::json to_json(const AicResult& result);

/// For p = 1..max_lags on the common sample t = max_lags+1..n:
/// n_eff ln det(Sigma_eps) + 2 nnz(theta12), Sigma_eps from a refit with no
/// zero restriction on theta11. The scaling matrix of order p is the leading
/// block of the one built at max_lags. Ties go to the smaller order.
AicResult aic_lag_order(const Panel& panel, int max_lags, Method method, double lambda,
                        std::optional<double> tau = std::nullopt);

}  // namespace gcvar
