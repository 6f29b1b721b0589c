#pragma once

#include "gcvar/linalg.hpp"
#include "gcvar/svar.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace gcvar {

/// Sorted sample of one observed variable, used through its truncated
/// empirical quantile.
class EmpiricalMarginal {
 public:
  EmpiricalMarginal() = default;
  explicit EmpiricalMarginal(std::span<const double> sample);

  const std::vector<double>& sorted_values() const { return sorted_; }
  Index n() const { return static_cast<Index>(sorted_.size()); }

  /// u = Phi(z) clipped to [1/(n+1), n/(n+1)], then the ceil(u n)-th order
  /// statistic.
  double inverse(double z) const;

  /// Phi^{-1}(r / (n+1)) with r = #{sample <= x} clamped to [1, n].
  double to_latent(double x) const;

 private:
  std::vector<double> sorted_;
};

/// Map from the latent Gaussian scale to the observed scale of one variable.
class MarginalTransform {
 public:
  /// Gaussian marginals: the observed variable is the latent one.
  static MarginalTransform identity();
  static MarginalTransform empirical(std::span<const double> sample);
  /// Known strictly increasing map and its inverse.
  static MarginalTransform function(std::function<double(double)> from_latent,
                                    std::function<double(double)> to_latent);

  double from_latent(double z) const;
  double to_latent(double x) const;

 private:
  std::function<double(double)> from_latent_;
  std::function<double(double)> to_latent_;
};

std::vector<MarginalTransform> empirical_marginals(const Eigen::MatrixXd& panel_values);

/// Diagonal of H^{-1} Pi sigma_eps (H^{-1} Pi)'; the largest absolute
/// off-diagonal entry is written to `offdiag` when given.
Eigen::MatrixXd sigma_xi_from_model(const StructuralModel& model, const Eigen::MatrixXd& sigma_eps,
                                    double* offdiag = nullptr);

enum class IrfMode { linearized, conditional, unconditional };

std::string_view to_string(IrfMode mode);
IrfMode parse_irf_mode(std::string_view name);

struct IrfRequest {
  Index shock = 0;      // variable whose own structural shock is set to delta
  Index response = 0;
  double delta = 1.0;
  int horizon = 10;
  int draws = 10000;
  std::uint64_t seed = 0;
  IrfMode mode = IrfMode::linearized;
  /// Conditioning point X_{t-1}, ..., X_{t-p} (pK values) for conditional mode.
  Eigen::VectorXd condition;
  /// Linearized mode only: scale the shock by Sigma_xi^{1/2}.
  bool unit_variance_shock = false;
};

struct IrfResult {
  std::vector<double> value;
  std::vector<double> std_error;  // zeros in linearized mode
};

/// Monte Carlo response E f_k^{-1}(Z_{t+s,k} | shocked) - E f_k^{-1}(Z_{t+s,k} | baseline).
/// Both arms share every random draw; draw v uses its own generator keyed on
/// (seed, v). Throws NumericalError("nonstationary model") when the
/// companion matrix has spectral radius >= 1.
IrfResult irf_mc(const StructuralModel& model, std::span<const MarginalTransform> marginals,
                 const IrfRequest& request);

/// delta [Upsilon_s Pi e_l]_k, or delta [Upsilon_s Sigma_xi^{1/2} Pi e_l]_k.
IrfResult irf_linearized(const StructuralModel& model, const IrfRequest& request);

IrfResult impulse_response(const StructuralModel& model,
                           std::span<const MarginalTransform> marginals, const IrfRequest& request);

}  // namespace gcvar
