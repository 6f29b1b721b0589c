#pragma once

#include <Eigen/Dense>

#include <vector>

namespace gcvar {

using Index = Eigen::Index;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Standard normal distribution function.
double normal_cdf(double z);

/// Inverse of the standard normal distribution function, u in (0, 1).
double normal_quantile(double u);

/// Largest absolute eigenvalue of a square matrix.
double spectral_radius(const Eigen::MatrixXd& a);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& a);

/// Companion matrix of a VAR(p) with coefficients a = [A_1, ..., A_p] (K x pK).
Eigen::MatrixXd companion(const Eigen::MatrixXd& a);

/// Stationary covariance of Z_t = A Z_{t-1} + e_t, i.e. the solution of
/// G = A G A' + S. Throws NumericalError("unstable autoregression") when the
/// spectral radius of A is not below one.
Eigen::MatrixXd lyapunov_variance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma_eps);

/// Submatrix on the given rows and columns.
Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<Index>& rows,
                       const std::vector<Index>& cols);

/// Copy of m with (m + m') / 2 applied, so that the result is exactly symmetric.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m);

}  // namespace gcvar
