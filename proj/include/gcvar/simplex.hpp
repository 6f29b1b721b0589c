#pragma once

#include <Eigen/Dense>

namespace gcvar::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Options {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  int max_iterations = 200000;
};

struct Result {
  Status status = Status::iteration_limit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase tableau simplex for
///
///   minimize c'x  subject to  A x <= b,  x >= 0.
///
/// Rows with negative right-hand side are handled through artificial
/// variables in phase one. Entering and leaving variables follow Bland's
/// rule, so the method terminates on degenerate problems. The final basic
/// solution is recomputed from the original data with an LU solve.
Result minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                const Options& options = {});

}  // namespace gcvar::lp
