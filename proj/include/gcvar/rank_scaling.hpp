#pragma once

#include "gcvar/linalg.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gcvar {

/// Raw time series: one column per variable, rows in time order.
struct Panel {
  Eigen::MatrixXd values;
  std::vector<std::string> names;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Throws InputError unless n >= 4, K >= 2, all values finite, names match the
/// column count and every column has at least two distinct values.
void validate(const Panel& panel);

/// Builds and validates a panel. Empty names are replaced by X1..XK.
Panel make_panel(Eigen::MatrixXd values, std::vector<std::string> names = {});

/// First-differences the named columns. When any column is differenced the
/// first row is dropped from every column so the panel stays rectangular.
Panel difference_columns(const Panel& panel, const std::vector<std::string>& columns);

/// UTF-8 CSV, header row with variable names, decimal point, no thousands
/// separators.
Panel read_panel_csv(const std::filesystem::path& path);
void write_panel_csv(const Panel& panel, const std::filesystem::path& path);

/// Rows hold (X_t', X_{t-1}', ..., X_{t-p}'), most recent block first.
struct LaggedDesign {
  Eigen::MatrixXd values;
  int lags = 1;
  Index block_size = 0;
  std::vector<std::string> names;
};

/// Lag stacking without any sample-size requirement.
Eigen::MatrixXd stack_lags(const Eigen::MatrixXd& values, int lags);

/// Lagged design of a panel. Requires lags < n - 3 so that at least four
/// stacked rows remain ("insufficient sample for lag order").
LaggedDesign build_lagged(const Panel& panel, int lags);

/// Lag stacking applied separately to disjoint row ranges [begin, end) of the
/// panel; the stacked rows are concatenated so that no lag crosses a range
/// boundary. Ranges shorter than lags + 1 rows contribute nothing.
LaggedDesign build_lagged_segments(const Panel& panel,
                                   const std::vector<std::pair<Index, Index>>& ranges, int lags);

/// Ranks 1..m with ties replaced by the average of their positions.
std::vector<double> mid_ranks(std::span<const double> x);

/// Hoeffding's form 12/(m^3 - m) sum (R_t - (m+1)/2)(S_t - (m+1)/2).
/// Throws NumericalError("zero rank variance") on a constant input.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// rho -> 2 sin(pi rho / 6), the Gaussian-copula correlation implied by
/// Spearman's rho.
double rho_to_correlation(double rho);

/// Copula scaling matrix of a lagged design, (p+1)K x (p+1)K.
struct ScalingMatrix {
  Eigen::MatrixXd sigma;
  Index block_size = 0;
  int lags = 1;

  Index dim() const { return sigma.rows(); }
};

/// Entrywise 2 sin(pi rho_ij / 6) from the Spearman matrix of the design
/// columns, followed by block averaging.
ScalingMatrix scaling_matrix(const LaggedDesign& design);

/// Replaces all diagonal blocks by their average and, for every lag offset d,
/// all blocks at offset d by their average (lower blocks become transposes).
/// Restores the block Toeplitz structure of a stationary process.
Eigen::MatrixXd average_blocks(const Eigen::MatrixXd& sigma, Index block_size);

/// Clips eigenvalues below at `floor`, reconstructs and rescales to unit
/// diagonal, repeating until the smallest eigenvalue of the rescaled matrix
/// is at least `floor`. Inputs already satisfying the floor are returned
/// unchanged.
ScalingMatrix psd_repair(const ScalingMatrix& sigma, double floor = 1e-6);
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& sigma, double floor = 1e-6);

}  // namespace gcvar
