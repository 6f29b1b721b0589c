#pragma once

#include "gcvar/linalg.hpp"
#include "gcvar/rank_scaling.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gcvar {

enum class Method { lasso, clime };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// mask(j, i) is true when entry j of column i is selected. Symmetric with a
/// true diagonal once produced by threshold_support.
struct SupportPattern {
  BoolMatrix mask;
  Method method = Method::lasso;

  Index dim() const { return mask.rows(); }
};

struct SparsePrecision {
  Eigen::MatrixXd theta;
  SupportPattern support;
  Index block_size = 0;

  Index lags() const { return block_size == 0 ? 0 : theta.rows() / block_size - 1; }
  Eigen::MatrixXd theta11() const { return theta.topLeftCorner(block_size, block_size); }
  /// K x pK strip to the right of the leading block.
  Eigen::MatrixXd theta12() const {
    return theta.topRightCorner(block_size, theta.cols() - block_size);
  }
};

/// Reduced-form VAR parameters recovered from a precision matrix.
struct VarParams {
  Eigen::MatrixXd a;          // K x pK, most recent lag first
  Eigen::MatrixXd sigma_eps;  // K x K
  double spectral_radius = 0.0;
};

struct LassoOptions {
  double tol = 1e-8;
  int max_iter = 10000;
};

/// Neighbourhood Lasso for column i: cyclic coordinate descent on
/// 0.5 x'Sx - S_{.,i}'x + lambda |x|_1 with x_i pinned at zero. The
/// solution satisfies S_{.,i} - Sx = lambda sign(x) on the free coordinates.
/// Throws NumericalError("lasso did not converge ...") after max_iter sweeps.
Eigen::VectorXd lasso_neighborhood(const Eigen::MatrixXd& sigma, Index i, double lambda,
                                   const LassoOptions& options = {});

/// Largest violation of the Lasso optimality conditions for column i.
double lasso_kkt_residual(const Eigen::MatrixXd& sigma, Index i, double lambda,
                          const Eigen::VectorXd& x);

/// CLIME column: min |w|_1 subject to |S w - e_i|_inf <= lambda, solved as
/// a linear program in the positive and negative parts of w.
/// Throws NumericalError("clime infeasible (singular scaling matrix)").
Eigen::VectorXd clime_column(const Eigen::MatrixXd& sigma, Index i, double lambda,
                             double tol = 1e-9);

/// Entry (j, i) is kept when |raw_columns[i](j)| >= tau; the diagonal is
/// always kept and the pattern is OR-symmetrized.
SupportPattern threshold_support(std::span<const Eigen::VectorXd> raw_columns, double tau,
                                 Method method = Method::lasso);

/// Column i solves the system restricted to its support,
/// B_i (B_i' S B_i)^{-1} B_i' e_i, and the result is symmetrized.
/// Throws NumericalError("refit singular at column i").
SparsePrecision refit_precision(const Eigen::MatrixXd& sigma, const SupportPattern& support,
                                Index block_size);

/// sigma_eps = theta11^{-1}, a = -sigma_eps * theta12.
/// Throws NumericalError("theta11 singular").
VarParams var_params(const SparsePrecision& precision);

struct PrecisionOptions {
  Method method = Method::lasso;
  double lambda = 0.05;
  std::optional<double> tau;                // defaults to 2 * lambda
  std::optional<bool> repair_psd;           // defaults to true for Lasso, false for CLIME
  double eigenvalue_floor = 1e-6;
  bool full_leading_block = false;          // no zero restriction on theta11
  LassoOptions lasso;
  double clime_tol = 1e-9;

  double effective_tau() const { return tau.value_or(2.0 * lambda); }
  bool effective_repair() const { return repair_psd.value_or(method == Method::lasso); }
};

/// Raw (unthresholded) column estimates for all (p+1)K columns.
std::vector<Eigen::VectorXd> raw_columns(const Eigen::MatrixXd& sigma, const PrecisionOptions& options);

/// Column problems, thresholding and refit. With tau == 0 every entry is
/// selected, so the column problems are skipped and the result is the dense
/// inverse.
SparsePrecision estimate_precision(const ScalingMatrix& sigma, const PrecisionOptions& options);

}  // namespace gcvar
