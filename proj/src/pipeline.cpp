#include "gcvar/pipeline.hpp"

#include "gcvar/errors.hpp"

namespace gcvar {

Estimate estimate(const Panel& panel, const EstimateConfig& config) {
  if (config.lags < 1) throw InputError("lag order must be at least 1");
  Estimate est;
  const LaggedDesign design = build_lagged(panel, config.lags);
  est.effective_n = design.values.rows();
  est.sigma = scaling_matrix(design);
  PrecisionOptions options;
  options.method = config.method;
  if (config.cross_validate) {
    est.cv = cross_validate(panel, config.lags, config.method, config.cv_plan);
    options.lambda = est.cv->lambda;
    options.tau = est.cv->tau;
  } else {
    if (!(config.lambda >= 0.0)) throw InputError("lambda must be nonnegative");
    options.lambda = config.lambda;
    options.tau = config.tau;
  }
  if (options.effective_tau() < options.lambda && options.effective_tau() != 0.0)
    throw InputError("tau must be at least lambda");
  est.lambda = options.lambda;
  est.tau = options.effective_tau();
  est.precision = estimate_precision(est.sigma, options);
  est.var = var_params(est.precision);
  return est;
}

Cpdag discover_graph(const Estimate& est, PcConfig config, bool restricted,
                     const std::vector<std::string>& names) {
  if (restricted) config.fixed_gaps = fixed_gaps_from_precision(est.precision.theta11());
  return pc_algorithm(est.var.sigma_eps, static_cast<long>(est.effective_n), config, names);
}

StructuralModel identify(const Estimate& est, const Cpdag& graph) {
  StructuralModel model = structural_coefficients(est.var.sigma_eps, graph);
  model.a = est.var.a;
  return model;
}

}  // namespace gcvar
