#include "gcvar/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gcvar::lp {

namespace {

using Eigen::Index;

/// Tableau with the objective row kept last. The last column is the
/// right-hand side; the objective row holds reduced costs and -z.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<Index> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Index rows() const { return t_.rows() - 1; }
  Index rhs_col() const { return t_.cols() - 1; }
  double value() const { return -t_(rows(), rhs_col()); }
  const std::vector<Index>& basis() const { return basis_; }
  double at(Index i, Index j) const { return t_(i, j); }

  void set_costs(const Eigen::VectorXd& cost) {
    const Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cost.size()) = cost.transpose();
    for (Index i = 0; i < m; ++i) {
      const Index b = basis_[static_cast<std::size_t>(i)];
      const double cb = b < cost.size() ? cost(b) : 0.0;
      if (cb != 0.0) t_.row(m) -= cb * t_.row(i);
    }
  }

  void pivot(Index r, Index e) {
    t_.row(r) /= t_(r, e);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, e);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = e;
  }

  /// Bland's rule over the first `allowed` columns.
  Status run(Index allowed, const Options& options, int& iterations) {
    const Index m = rows();
    const Index rhs = rhs_col();
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(m, j) < -options.optimality_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      if (iterations >= options.max_iterations) return Status::iteration_limit;

      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double d = t_(i, enter);
        if (d <= options.pivot_tol) continue;
        const double ratio = std::max(t_(i, rhs), 0.0) / d;
        if (leave < 0) {
          best = ratio;
          leave = i;
          continue;
        }
        const double slack = 1e-12 * std::max(1.0, best);
        if (ratio < best - slack ||
            (ratio <= best + slack && basis_[static_cast<std::size_t>(i)] <
                                          basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
      ++iterations;
    }
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Index> basis_;
};

}  // namespace

Result minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                const Options& options) {
  const Index m = a.rows();
  const Index n = a.cols();
  Index n_art = 0;
  for (Index i = 0; i < m; ++i) n_art += b(i) < 0.0 ? 1 : 0;
  const Index cols = n + m + n_art;

  // Columns: x (n), slacks (m), artificials for rows with b < 0.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  Index next_art = n + m;
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = sign;
    t(i, cols) = sign * b(i);
    if (sign < 0.0) {
      t(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art++;
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
    }
  }
  Tableau tab(std::move(t), std::move(basis));

  Result result;
  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    phase1.tail(n_art).setOnes();
    tab.set_costs(phase1);
    const Status s = tab.run(cols, options, result.iterations);
    if (s == Status::iteration_limit) {
      result.status = s;
      return result;
    }
    if (tab.value() > options.feasibility_tol) {
      result.status = Status::infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where no real column has a usable entry are redundant.
    for (Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < n + m) continue;
      for (Index j = 0; j < n + m; ++j) {
        if (std::abs(tab.at(i, j)) > options.pivot_tol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = c;
  tab.set_costs(phase2);
  result.status = tab.run(n + m, options, result.iterations);
  if (result.status != Status::optimal) return result;

  // Read the basic solution, then recompute it from the original rows.
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n + m);
  std::vector<Index> kept_rows;
  std::vector<Index> basic_cols;
  for (Index i = 0; i < m; ++i) {
    const Index bcol = tab.basis()[static_cast<std::size_t>(i)];
    if (bcol >= n + m) continue;
    full(bcol) = tab.at(i, tab.rhs_col());
    basic_cols.push_back(bcol);
    kept_rows.push_back(i);
  }
  const auto k = static_cast<Index>(basic_cols.size());
  if (k == m) {
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
    for (Index q = 0; q < k; ++q) {
      const Index col = basic_cols[static_cast<std::size_t>(q)];
      if (col < n)
        basis_matrix.col(q) = a.col(col);
      else
        basis_matrix(col - n, q) = 1.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.allFinite() && (basis_matrix * xb - b).cwiseAbs().maxCoeff() <= options.feasibility_tol) {
      full.setZero();
      for (Index q = 0; q < k; ++q) full(basic_cols[static_cast<std::size_t>(q)]) = xb(q);
    }
  }
  result.x = full.head(n).cwiseMax(0.0);
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace gcvar::lp
