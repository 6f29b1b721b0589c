#include "gcvar/tuning.hpp"

#include "gcvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace gcvar {

double cv_score(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& sigma_test) {
  if (theta.rows() != sigma_test.rows() || theta.cols() != sigma_test.cols())
    throw InputError("precision and test scaling matrix differ in size");
  Eigen::LLT<Eigen::MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success || !theta.allFinite())
    throw NumericalError("invalid precision for scoring");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return (sigma_test.cwiseProduct(theta.transpose())).sum() - log_det;
}

double cv_score_abs_det(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& sigma_test) {
  if (theta.rows() != sigma_test.rows() || theta.cols() != sigma_test.cols())
    throw InputError("precision and test scaling matrix differ in size");
  if (!theta.allFinite()) return std::numeric_limits<double>::infinity();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(theta);
  const Eigen::VectorXd u = lu.matrixLU().diagonal().cwiseAbs();
  if (!(u.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  return (sigma_test.cwiseProduct(theta.transpose())).sum() - u.array().log().sum();
}

namespace {

bool leading_block_empty(const ScalingMatrix& sigma, Method method, double lambda, double zero_tol) {
  PrecisionOptions options;
  options.method = method;
  options.lambda = lambda;
  try {
    const Eigen::MatrixXd t11 = estimate_precision(sigma, options).theta11();
    for (Index i = 0; i < t11.rows(); ++i)
      for (Index j = 0; j < t11.cols(); ++j)
        if (i != j && !(std::abs(t11(i, j)) < zero_tol)) return false;
    return true;
  } catch (const NumericalError&) {
    return false;
  }
}

}  // namespace

double lambda_zero_search(const ScalingMatrix& sigma, Method method,
                          const LambdaSearchOptions& options) {
  double lambda = options.start;
  if (leading_block_empty(sigma, method, lambda, options.zero_tol)) {
    for (int step = 0; step < options.max_steps; ++step) {
      if (!leading_block_empty(sigma, method, lambda / 2.0, options.zero_tol)) break;
      lambda /= 2.0;
    }
    return lambda;
  }
  for (int step = 0; step < options.max_steps; ++step) {
    lambda *= 2.0;
    if (leading_block_empty(sigma, method, lambda, options.zero_tol)) break;
  }
  return lambda;
}

double lambda_zero_search(const Panel& panel, int lags, Method method,
                          const LambdaSearchOptions& options) {
  return lambda_zero_search(scaling_matrix(build_lagged(panel, lags)), method, options);
}

nlohmann::json to_json(const CvResult& result) {
  nlohmann::json j;
  j["lambda0"] = result.lambda0;
  j["grid"] = result.grid;
  nlohmann::json folds = nlohmann::json::array();
  for (Index g = 0; g < result.fold_scores.rows(); ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (Index f = 0; f < result.fold_scores.cols(); ++f) {
      const double v = result.fold_scores(g, f);
      row.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    }
    folds.push_back(std::move(row));
  }
  j["fold_scores"] = std::move(folds);
  nlohmann::json means = nlohmann::json::array();
  for (double v : result.mean_scores) means.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
  j["mean_scores"] = std::move(means);
  j["lambda"] = result.lambda;
  j["tau"] = result.tau;
  return j;
}

std::vector<std::pair<Index, Index>> fold_blocks(Index n, int n_folds) {
  if (n_folds < 2) throw InputError("cross-validation needs at least two folds");
  const Index size = n / n_folds;
  std::vector<std::pair<Index, Index>> out;
  for (int f = 0; f < n_folds; ++f) out.emplace_back(f * size, (f + 1) * size);
  return out;
}

CvResult cross_validate(const Panel& panel, int lags, Method method, const CvPlan& plan) {
  if (!(plan.tau_factor > 0.0)) throw InputError("tau factor must be positive");
  const Index n = panel.rows();
  const auto blocks = fold_blocks(n, plan.n_folds);
  if (blocks.front().second - blocks.front().first - lags < 4) throw InputError("fold too small");

  CvResult result;
  if (plan.lambda_grid.empty()) {
    if (plan.grid_size < 1) throw InputError("grid size must be positive");
    result.lambda0 = lambda_zero_search(panel, lags, method);
    double lambda = result.lambda0;
    for (int g = 0; g < plan.grid_size; ++g) {
      lambda /= 2.0;
      result.grid.push_back(lambda);
    }
  } else {
    result.grid = plan.lambda_grid;
    if (std::any_of(result.grid.begin(), result.grid.end(), [](double v) { return !(v > 0.0); }))
      throw InputError("lambda grid must be positive");
    std::sort(result.grid.begin(), result.grid.end(), std::greater<>());
  }

  const auto grid_size = static_cast<Index>(result.grid.size());
  result.fold_scores.resize(grid_size, plan.n_folds);
  for (int f = 0; f < plan.n_folds; ++f) {
    const auto [begin, end] = blocks[static_cast<std::size_t>(f)];
    const ScalingMatrix test = scaling_matrix(build_lagged_segments(panel, {{begin, end}}, lags));
    const ScalingMatrix train =
        scaling_matrix(build_lagged_segments(panel, {{0, begin}, {end, n}}, lags));
    for (Index g = 0; g < grid_size; ++g) {
      PrecisionOptions options;
      options.method = method;
      options.lambda = result.grid[static_cast<std::size_t>(g)];
      options.tau = plan.tau_factor * options.lambda;
      double score = std::numeric_limits<double>::infinity();
      try {
        const Eigen::MatrixXd theta = estimate_precision(train, options).theta;
        score = plan.indefinite == IndefiniteFit::abs_determinant ? cv_score_abs_det(theta, test.sigma)
                                                                 : cv_score(theta, test.sigma);
      } catch (const NumericalError&) {
      }
      result.fold_scores(g, f) = score;
    }
  }

  Index best = 0;
  for (Index g = 0; g < grid_size; ++g) {
    const double mean = result.fold_scores.row(g).mean();
    result.mean_scores.push_back(mean);
    if (mean < result.mean_scores[static_cast<std::size_t>(best)]) best = g;
  }
  if (!std::isfinite(result.mean_scores[static_cast<std::size_t>(best)]))
    throw NumericalError("no grid point produced a scorable precision matrix");
  result.lambda = result.grid[static_cast<std::size_t>(best)];
  result.tau = plan.tau_factor * result.lambda;
  return result;
}

nlohmann::json to_json(const AicResult& result) {
  return {{"lags", result.lags},
          {"log_det", result.log_det},
          {"df", result.df},
          {"score", result.score},
          {"selected", result.selected},
          {"effective_n", result.effective_n}};
}

AicResult aic_lag_order(const Panel& panel, int max_lags, Method method, double lambda,
                        std::optional<double> tau) {
  if (max_lags < 1) throw InputError("maximum lag order must be at least 1");
  const Index n = panel.rows();
  if (max_lags >= n - 3) throw InputError("insufficient sample for lag order");
  AicResult result;
  result.effective_n = n - max_lags;
  // Every order reads the leading block of one scaling matrix, so an extra
  // lag with an empty support leaves the score unchanged.
  const ScalingMatrix widest = scaling_matrix(build_lagged(panel, max_lags));
  const Index k = panel.cols();
  for (int p = 1; p <= max_lags; ++p) {
    ScalingMatrix sigma;
    sigma.block_size = k;
    sigma.lags = p;
    sigma.sigma = widest.sigma.topLeftCorner((p + 1) * k, (p + 1) * k);
    PrecisionOptions options;
    options.method = method;
    options.lambda = lambda;
    options.tau = tau.has_value() ? std::optional<double>(*tau) : std::nullopt;
    options.full_leading_block = true;
    const SparsePrecision precision = estimate_precision(sigma, options);
    const VarParams var = var_params(precision);
    Eigen::LLT<Eigen::MatrixXd> llt(var.sigma_eps);
    if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance not positive definite");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::MatrixXd t12 = precision.theta12();
    const int df = static_cast<int>((t12.array() != 0.0).count());
    result.lags.push_back(p);
    result.log_det.push_back(log_det);
    result.df.push_back(df);
    result.score.push_back(static_cast<double>(result.effective_n) * log_det + 2.0 * df);
  }
  const auto best = std::min_element(result.score.begin(), result.score.end()) - result.score.begin();
  result.selected = result.lags[static_cast<std::size_t>(best)];
  return result;
}

}  // namespace gcvar
