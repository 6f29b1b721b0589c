#include "gcvar/irf.hpp"

#include "gcvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>

namespace gcvar {

EmpiricalMarginal::EmpiricalMarginal(std::span<const double> sample)
    : sorted_(sample.begin(), sample.end()) {
  if (sorted_.empty()) throw InputError("empirical marginal needs a nonempty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMarginal::inverse(double z) const {
  const double n = static_cast<double>(sorted_.size());
  const double u = std::clamp(normal_cdf(z), 1.0 / (n + 1.0), n / (n + 1.0));
  const auto rank = std::clamp<long>(static_cast<long>(std::ceil(u * n)), 1, static_cast<long>(n));
  return sorted_[static_cast<std::size_t>(rank - 1)];
}

double EmpiricalMarginal::to_latent(double x) const {
  const auto n = static_cast<long>(sorted_.size());
  const auto count = static_cast<long>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
  const long r = std::clamp<long>(count, 1, n);
  return normal_quantile(static_cast<double>(r) / static_cast<double>(n + 1));
}

MarginalTransform MarginalTransform::identity() {
  return function([](double z) { return z; }, [](double x) { return x; });
}

MarginalTransform MarginalTransform::empirical(std::span<const double> sample) {
  auto marginal = std::make_shared<const EmpiricalMarginal>(sample);
  return function([marginal](double z) { return marginal->inverse(z); },
                  [marginal](double x) { return marginal->to_latent(x); });
}

MarginalTransform MarginalTransform::function(std::function<double(double)> from_latent,
                                              std::function<double(double)> to_latent) {
  MarginalTransform t;
  t.from_latent_ = std::move(from_latent);
  t.to_latent_ = std::move(to_latent);
  return t;
}

double MarginalTransform::from_latent(double z) const { return from_latent_(z); }
double MarginalTransform::to_latent(double x) const { return to_latent_(x); }

std::vector<MarginalTransform> empirical_marginals(const Eigen::MatrixXd& panel_values) {
  std::vector<MarginalTransform> out;
  for (Index j = 0; j < panel_values.cols(); ++j) {
    const Eigen::VectorXd col = panel_values.col(j);
    out.push_back(MarginalTransform::empirical({col.data(), static_cast<std::size_t>(col.size())}));
  }
  return out;
}

Eigen::MatrixXd sigma_xi_from_model(const StructuralModel& model, const Eigen::MatrixXd& sigma_eps,
                                    double* offdiag) {
  const Index k = model.size();
  const Eigen::MatrixXd h_inv =
      model.h.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd full = h_inv * model.pi * sigma_eps * (h_inv * model.pi).transpose();
  if (offdiag != nullptr) {
    Eigen::MatrixXd off = full;
    off.diagonal().setZero();
    *offdiag = k > 0 ? off.cwiseAbs().maxCoeff() : 0.0;
  }
  return full.diagonal().asDiagonal();
}

std::string_view to_string(IrfMode mode) {
  switch (mode) {
    case IrfMode::linearized: return "linearized";
    case IrfMode::conditional: return "conditional";
    case IrfMode::unconditional: return "unconditional";
  }
  return "linearized";
}

IrfMode parse_irf_mode(std::string_view name) {
  if (name == "linearized") return IrfMode::linearized;
  if (name == "conditional") return IrfMode::conditional;
  if (name == "unconditional") return IrfMode::unconditional;
  throw InputError("unknown IRF mode '" + std::string(name) + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_request(const StructuralModel& model, const IrfRequest& request) {
  const Index k = model.size();
  if (request.shock < 0 || request.shock >= k) throw InputError("shock index out of range");
  if (request.response < 0 || request.response >= k) throw InputError("response index out of range");
  if (request.horizon < 0) throw InputError("horizon must be nonnegative");
}

/// Position of variable l's own shock in the recursive ordering.
Index shock_position(const StructuralModel& model, Index l) {
  const auto it = std::find(model.order.begin(), model.order.end(), l);
  return static_cast<Index>(it - model.order.begin());
}

}  // namespace

IrfResult irf_linearized(const StructuralModel& model, const IrfRequest& request) {
  check_request(model, request);
  const auto ups = ma_sequence(model, request.horizon);
  const Index j = shock_position(model, request.shock);
  const double scale = request.unit_variance_shock ? std::sqrt(model.sigma_xi(j, j)) : 1.0;
  IrfResult out;
  for (const auto& u : ups) {
    out.value.push_back(request.delta * scale * u(request.response, j));
    out.std_error.push_back(0.0);
  }
  return out;
}

IrfResult irf_mc(const StructuralModel& model, std::span<const MarginalTransform> marginals,
                 const IrfRequest& request) {
  check_request(model, request);
  if (request.draws < 1) throw InputError("Monte Carlo IRF needs at least one draw");
  const Index k = model.size();
  if (!marginals.empty() && static_cast<Index>(marginals.size()) != k)
    throw InputError("one marginal transform per variable is required");
  const int p = std::max(model.lags(), 1);
  const Index state_dim = p * k;
  const Eigen::MatrixXd a = model.a.size() == 0 ? Eigen::MatrixXd::Zero(k, k) : model.a;
  const Eigen::MatrixXd comp = companion(a);
  if (spectral_radius(comp) >= 1.0) throw NumericalError("nonstationary model");

  const auto ups = ma_sequence(model, request.horizon);
  const Eigen::MatrixXd impact = model.pi.transpose() * model.h;
  const Eigen::VectorXd sd = model.sigma_xi.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Index j = shock_position(model, request.shock);
  const Index kr = request.response;
  auto observe = [&](double z) { return marginals.empty() ? z : marginals[static_cast<std::size_t>(kr)].from_latent(z); };

  Eigen::VectorXd fixed_state = Eigen::VectorXd::Zero(state_dim);
  Eigen::MatrixXd gamma_factor;
  if (request.mode == IrfMode::conditional) {
    if (request.condition.size() != state_dim)
      throw InputError("conditioning point must hold " + std::to_string(state_dim) + " values");
    for (Index q = 0; q < state_dim; ++q) {
      const double x = request.condition(q);
      fixed_state(q) = marginals.empty() ? x : marginals[static_cast<std::size_t>(q % k)].to_latent(x);
    }
  } else {
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(state_dim, state_dim);
    noise.topLeftCorner(k, k) = innovation_covariance(model);
    const Eigen::MatrixXd gamma = lyapunov_variance(comp, noise);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
    gamma_factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  const auto steps = static_cast<std::size_t>(request.horizon) + 1;
  const auto m = static_cast<std::size_t>(request.draws);
  std::vector<double> diffs(m * steps);
  Eigen::VectorXd state(state_dim);
  Eigen::VectorXd xi(k);
  Eigen::VectorXd normals(state_dim);
  for (std::size_t v = 0; v < m; ++v) {
    std::mt19937_64 rng(splitmix64(request.seed ^ splitmix64(v)));
    std::normal_distribution<double> normal;
    if (request.mode == IrfMode::conditional) {
      state = fixed_state;
    } else {
      for (Index q = 0; q < state_dim; ++q) normals(q) = normal(rng);
      state = gamma_factor * normals;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      for (Index q = 0; q < k; ++q) xi(q) = sd(q) * normal(rng);
      if (s == 0) xi(j) = 0.0;
      const Eigen::VectorXd next = a * state + impact * xi;
      if (p > 1) {
        state.tail(state_dim - k) = state.head(state_dim - k).eval();
      }
      state.head(k) = next;
      const double baseline = next(kr);
      const double shocked = baseline + request.delta * ups[s](kr, j);
      diffs[v * steps + s] = observe(shocked) - observe(baseline);
    }
  }

  IrfResult out;
  for (std::size_t s = 0; s < steps; ++s) {
    double mean = 0.0;
    for (std::size_t v = 0; v < m; ++v) mean += diffs[v * steps + s];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
      const double e = diffs[v * steps + s] - mean;
      ss += e * e;
    }
    out.value.push_back(mean);
    out.std_error.push_back(m > 1 ? std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0);
  }
  return out;
}

IrfResult impulse_response(const StructuralModel& model, std::span<const MarginalTransform> marginals,
                           const IrfRequest& request) {
  if (request.mode == IrfMode::linearized) return irf_linearized(model, request);
  return irf_mc(model, marginals, request);
}

}  // namespace gcvar
