#pragma once

#include "gcvar/linalg.hpp"
#include "gcvar/pc_dag.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gcvar {

/// Recursive structural form of the innovations,
///   Pi eps_t = D Pi eps_t + xi_t,  H = (I - D)^{-1},
/// together with the reduced-form autoregression.
struct StructuralModel {
  std::vector<std::string> names;
  std::vector<Index> order;      // order[r] is the variable in recursive position r
  Eigen::MatrixXd pi;            // row r is e_{order[r]}'
  Eigen::MatrixXd delta;         // regression coefficients in natural coordinates
  Eigen::MatrixXd d;             // Pi delta Pi', strictly lower triangular
  Eigen::MatrixXd h;             // (I - D)^{-1}, unit lower triangular
  Eigen::MatrixXd sigma_xi;      // diagonal
  Eigen::MatrixXd a;             // K x pK, may be empty until attached
  double xi_offdiag_residual = 0.0;

  Index size() const { return static_cast<Index>(order.size()); }
  int lags() const { return a.size() == 0 ? 0 : static_cast<int>(a.cols() / a.rows()); }
};

/// V(i) = {j : j -> i}. Throws IdentificationError when an undirected edge
/// remains.
std::vector<std::vector<Index>> parent_sets(const Cpdag& dag);

/// Lexicographically smallest topological order (Kahn's algorithm with a
/// min-index queue). Throws IdentificationError("not a DAG") on a cycle.
std::vector<Index> topological_order(const Cpdag& dag);

Eigen::MatrixXd permutation_matrix(const std::vector<Index>& order);

/// Per-node regression of eps_i on its parents using sigma_eps, the
/// permutation to recursive order, H and the diagonal of
/// H^{-1} Pi sigma_eps Pi' H^{-1}'. Off-diagonal mass of that product is
/// reported in xi_offdiag_residual.
StructuralModel structural_coefficients(const Eigen::MatrixXd& sigma_eps, const Cpdag& dag);

/// Pi' H Sigma_xi H' Pi.
Eigen::MatrixXd innovation_covariance(const StructuralModel& model);

/// Upsilon_s = Psi_s Pi' H, with Psi_s the reduced-form MA coefficient
/// (A^s when p = 1, top-left block of the companion power otherwise).
Eigen::MatrixXd ma_coefficients(const StructuralModel& model, int horizon);

/// Upsilon_0, ..., Upsilon_S.
std::vector<Eigen::MatrixXd> ma_sequence(const StructuralModel& model, int max_horizon);

nlohmann::json to_json(const StructuralModel& model);
StructuralModel structural_model_from_json(const nlohmann::json& j);

}  // namespace gcvar
