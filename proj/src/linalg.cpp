#include "gcvar/linalg.hpp"

#include "gcvar/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace gcvar {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw InputError("normal quantile needs a probability in (0, 1)");
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, u);
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

Eigen::MatrixXd companion(const Eigen::MatrixXd& a) {
  const Index k = a.rows();
  const Index kp = a.cols();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(kp, kp);
  c.topRows(k) = a;
  if (kp > k) c.bottomLeftCorner(kp - k, kp - k).setIdentity();
  return c;
}

Eigen::MatrixXd lyapunov_variance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma_eps) {
  if (spectral_radius(a) >= 1.0) throw NumericalError("unstable autoregression");
  // Doubling: G_{j+1} = G_j + A_j G_j A_j', A_{j+1} = A_j^2 sums A^i S A'^i
  // over i < 2^{j+1}.
  Eigen::MatrixXd g = sigma_eps;
  Eigen::MatrixXd ak = a;
  for (int it = 0; it < 64; ++it) {
    const Eigen::MatrixXd inc = ak * g * ak.transpose();
    g += inc;
    ak = (ak * ak).eval();
    if (inc.cwiseAbs().maxCoeff() <= 1e-17 * std::max(1.0, g.cwiseAbs().maxCoeff())) break;
  }
  g = symmetrized(g);
  // G <- A G A' + S is a contraction; a few passes polish the doubling sum.
  for (int it = 0; it < 4; ++it) g = symmetrized(a * g * a.transpose() + sigma_eps);
  const double residual = (g - a * g * a.transpose() - sigma_eps).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff())))
    throw NumericalError("lyapunov solve did not reach tolerance");
  return g;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<Index>& rows,
                       const std::vector<Index>& cols) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace gcvar
