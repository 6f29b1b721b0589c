#include "gcvar/sparse_precision.hpp"

#include "gcvar/errors.hpp"
#include "gcvar/simplex.hpp"

#include <cmath>
#include <string>

namespace gcvar {

std::string_view to_string(Method method) {
  return method == Method::lasso ? "lasso" : "clime";
}

Method parse_method(std::string_view name) {
  if (name == "lasso") return Method::lasso;
  if (name == "clime") return Method::clime;
  throw InputError("unknown method '" + std::string(name) + "' (expected lasso or clime)");
}

namespace {

double soft_threshold(double r, double lambda) {
  if (r > lambda) return r - lambda;
  if (r < -lambda) return r + lambda;
  return 0.0;
}

void check_column(const Eigen::MatrixXd& sigma, Index i) {
  if (sigma.rows() != sigma.cols()) throw InputError("scaling matrix must be square");
  if (i < 0 || i >= sigma.rows()) throw InputError("column index out of range");
}

}  // namespace

Eigen::VectorXd lasso_neighborhood(const Eigen::MatrixXd& sigma, Index i, double lambda,
                                   const LassoOptions& options) {
  check_column(sigma, i);
  if (!(lambda >= 0.0)) throw InputError("lasso penalty must be nonnegative");
  const Index d = sigma.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  // grad = S x - S_{.,i}, kept current after every coordinate move.
  Eigen::VectorXd grad = -sigma.col(i);
  for (int sweep = 0; sweep < options.max_iter; ++sweep) {
    double largest = 0.0;
    for (Index j = 0; j < d; ++j) {
      if (j == i) continue;
      const double sjj = sigma(j, j);
      if (!(sjj > 0.0)) throw NumericalError("lasso: nonpositive diagonal in scaling matrix");
      const double old = x(j);
      const double updated = soft_threshold(sjj * old - grad(j), lambda) / sjj;
      const double change = updated - old;
      if (change != 0.0) {
        x(j) = updated;
        grad.noalias() += change * sigma.col(j);
        largest = std::max(largest, std::abs(change));
      }
    }
    if (largest < options.tol) return x;
  }
  throw NumericalError("lasso did not converge for column " + std::to_string(i) +
                       " (KKT residual " + std::to_string(lasso_kkt_residual(sigma, i, lambda, x)) +
                       ")");
}

double lasso_kkt_residual(const Eigen::MatrixXd& sigma, Index i, double lambda,
                          const Eigen::VectorXd& x) {
  check_column(sigma, i);
  double worst = std::abs(x(i));
  const Eigen::VectorXd r = sigma.col(i) - sigma * x;
  for (Index j = 0; j < x.size(); ++j) {
    if (j == i) continue;
    const double v = x(j) == 0.0 ? std::max(0.0, std::abs(r(j)) - lambda)
                                 : std::abs(r(j) - lambda * (x(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::VectorXd clime_column(const Eigen::MatrixXd& sigma, Index i, double lambda, double tol) {
  check_column(sigma, i);
  if (!(lambda >= 0.0)) throw InputError("clime penalty must be nonnegative");
  const Index d = sigma.rows();
  // w = u - v with u, v >= 0:  S w <= lambda + e_i  and  -S w <= lambda - e_i.
  Eigen::MatrixXd a(2 * d, 2 * d);
  a << sigma, -sigma, -sigma, sigma;
  Eigen::VectorXd b = Eigen::VectorXd::Constant(2 * d, lambda);
  b(i) += 1.0;
  b(d + i) -= 1.0;
  const Eigen::VectorXd c = Eigen::VectorXd::Ones(2 * d);
  lp::Options options;
  options.feasibility_tol = tol;
  const lp::Result res = lp::minimize(c, a, b, options);
  if (res.status == lp::Status::infeasible)
    throw NumericalError("clime infeasible (singular scaling matrix)");
  if (res.status != lp::Status::optimal)
    throw NumericalError("clime linear program failed for column " + std::to_string(i));
  return res.x.head(d) - res.x.tail(d);
}

SupportPattern threshold_support(std::span<const Eigen::VectorXd> raw_columns, double tau,
                                 Method method) {
  if (!(tau >= 0.0)) throw InputError("threshold must be nonnegative");
  const auto d = static_cast<Index>(raw_columns.size());
  SupportPattern pattern;
  pattern.method = method;
  pattern.mask = BoolMatrix::Constant(d, d, false);
  for (Index i = 0; i < d; ++i) {
    const Eigen::VectorXd& col = raw_columns[static_cast<std::size_t>(i)];
    if (col.size() != d) throw InputError("raw column length does not match column count");
    for (Index j = 0; j < d; ++j)
      if (std::abs(col(j)) >= tau) pattern.mask(j, i) = true;
  }
  for (Index i = 0; i < d; ++i) {
    pattern.mask(i, i) = true;
    for (Index j = 0; j < i; ++j) {
      const bool either = pattern.mask(i, j) || pattern.mask(j, i);
      pattern.mask(i, j) = either;
      pattern.mask(j, i) = either;
    }
  }
  return pattern;
}

SparsePrecision refit_precision(const Eigen::MatrixXd& sigma, const SupportPattern& support,
                                Index block_size) {
  const Index d = sigma.rows();
  if (sigma.cols() != d || support.dim() != d) throw InputError("support does not match scaling matrix");
  constexpr double kMinRcond = 1e-14;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> full_lu;
  for (Index i = 0; i < d; ++i) {
    std::vector<Index> idx;
    Index pos = -1;
    for (Index j = 0; j < d; ++j) {
      if (support.mask(j, i) || j == i) {
        if (j == i) pos = static_cast<Index>(idx.size());
        idx.push_back(j);
      }
    }
    const auto s = static_cast<Index>(idx.size());
    if (s == d) {
      if (!full_lu) {
        full_lu.emplace(sigma);
        if (!(full_lu->rcond() > kMinRcond))
          throw NumericalError("refit singular at column " + std::to_string(i));
      }
      m.col(i) = full_lu->solve(Eigen::VectorXd::Unit(d, i));
      continue;
    }
    const Eigen::MatrixXd sub = select(sigma, idx, idx);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sub);
    if (!(lu.rcond() > kMinRcond)) throw NumericalError("refit singular at column " + std::to_string(i));
    const Eigen::VectorXd y = lu.solve(Eigen::VectorXd::Unit(s, pos));
    for (Index q = 0; q < s; ++q) m(idx[static_cast<std::size_t>(q)], i) = y(q);
  }
  SparsePrecision out;
  out.theta = symmetrized(m);
  out.support = support;
  out.block_size = block_size;
  return out;
}

VarParams var_params(const SparsePrecision& precision) {
  const Index k = precision.block_size;
  if (k <= 0 || precision.theta.rows() % k != 0) throw InputError("precision block size mismatch");
  const Eigen::MatrixXd theta11 = precision.theta11();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(theta11);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("theta11 singular");
  VarParams out;
  out.sigma_eps = symmetrized(lu.inverse());
  out.a = -out.sigma_eps * precision.theta12();
  if (out.a.cols() > 0) out.spectral_radius = spectral_radius(companion(out.a));
  return out;
}

std::vector<Eigen::VectorXd> raw_columns(const Eigen::MatrixXd& sigma, const PrecisionOptions& options) {
  std::vector<Eigen::VectorXd> cols;
  cols.reserve(static_cast<std::size_t>(sigma.cols()));
  for (Index i = 0; i < sigma.cols(); ++i) {
    if (options.method == Method::lasso) {
      Eigen::VectorXd x = -lasso_neighborhood(sigma, i, options.lambda, options.lasso);
      x(i) = 1.0;
      cols.push_back(std::move(x));
    } else {
      cols.push_back(clime_column(sigma, i, options.lambda, options.clime_tol));
    }
  }
  return cols;
}

SparsePrecision estimate_precision(const ScalingMatrix& sigma, const PrecisionOptions& options) {
  if (!(options.lambda >= 0.0)) throw InputError("lambda must be nonnegative");
  const double tau = options.effective_tau();
  if (!(tau >= 0.0)) throw InputError("tau must be nonnegative");
  const Eigen::MatrixXd s =
      options.effective_repair() ? psd_repair(sigma.sigma, options.eigenvalue_floor) : sigma.sigma;
  const Index d = s.rows();
  const Index k = sigma.block_size;
  SupportPattern support;
  if (tau == 0.0) {
    support.mask = BoolMatrix::Constant(d, d, true);
    support.method = options.method;
  } else {
    const auto cols = raw_columns(s, options);
    support = threshold_support(cols, tau, options.method);
  }
  if (options.full_leading_block) support.mask.topLeftCorner(k, k).setConstant(true);
  return refit_precision(s, support, k);
}

}  // namespace gcvar
