#pragma once

#include "gcvar/pc_dag.hpp"
#include "gcvar/rank_scaling.hpp"
#include "gcvar/sparse_precision.hpp"
#include "gcvar/svar.hpp"
#include "gcvar/tuning.hpp"

#include <optional>

namespace gcvar {

struct EstimateConfig {
  int lags = 1;
  Method method = Method::lasso;
  double lambda = 0.05;
  std::optional<double> tau;  // 2 * lambda when unset
  bool cross_validate = false;
  CvPlan cv_plan;
};

struct Estimate {
  ScalingMatrix sigma;
  SparsePrecision precision;
  VarParams var;
  double lambda = 0.0;
  double tau = 0.0;
  Index effective_n = 0;
  std::optional<CvResult> cv;
};

/// Scaling matrix, optional cross-validation, sparse precision and the
/// reduced-form VAR parameters.
Estimate estimate(const Panel& panel, const EstimateConfig& config);

/// PC on sigma_eps. In restricted mode the zeros of theta11 are fixed gaps.
Cpdag discover_graph(const Estimate& est, PcConfig config, bool restricted,
                     const std::vector<std::string>& names);

/// Structural model with the autoregression attached; throws
/// IdentificationError when the graph is not fully directed.
StructuralModel identify(const Estimate& est, const Cpdag& graph);

}  // namespace gcvar
