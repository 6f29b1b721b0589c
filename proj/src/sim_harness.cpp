#include "gcvar/sim_harness.hpp"

#include "gcvar/errors.hpp"
#include "gcvar/io.hpp"
#include "gcvar/pipeline.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace gcvar {

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::chain: return "chain";
    case Structure::common_cause: return "common_cause";
    case Structure::v_structure: return "v_structure";
    case Structure::diamond1: return "diamond1";
    case Structure::diamond2: return "diamond2";
    case Structure::independent: return "independent";
  }
  return "v_structure";
}

Structure parse_structure(std::string_view name) {
  for (auto s : {Structure::chain, Structure::common_cause, Structure::v_structure,
                 Structure::diamond1, Structure::diamond2, Structure::independent})
    if (to_string(s) == name) return s;
  throw InputError("unknown structure '" + std::string(name) + "'");
}

Index cluster_size(Structure s) {
  return s == Structure::diamond1 || s == Structure::diamond2 ? 4 : 3;
}

Eigen::MatrixXd structure_h(Structure s) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(cluster_size(s), cluster_size(s));
  switch (s) {
    case Structure::chain:  // 1 -> 2 -> 3
      h(1, 0) = 1.0;
      h(2, 0) = 1.0;
      h(2, 1) = 1.0;
      break;
    case Structure::common_cause:  // 1 <- 2 -> 3
      h(0, 1) = 1.0;
      h(2, 1) = 1.0;
      break;
    case Structure::v_structure:  // 1 -> 3 <- 2
      h(2, 0) = 1.0;
      h(2, 1) = 1.0;
      break;
    case Structure::diamond1:  // 1 -> 3 <- 2, 1 -> 4 <- 2
      h(2, 0) = h(2, 1) = 1.0;
      h(3, 0) = h(3, 1) = 1.0;
      break;
    case Structure::diamond2:  // 1 -> 3 <- 2, 3 -> 4
      h(2, 0) = h(2, 1) = 1.0;
      h(3, 0) = h(3, 1) = h(3, 2) = 1.0;
      break;
    case Structure::independent: break;
  }
  return h;
}

Eigen::MatrixXd cluster_autoregression(Structure s, double a) {
  const Index n = cluster_size(s);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.triangularView<Eigen::Lower>().setConstant(a);
  return out;
}

namespace {

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, Index copies) {
  const Index b = block.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(b * copies, b * copies);
  for (Index c = 0; c < copies; ++c) out.block(c * b, c * b, b, b) = block;
  return out;
}

}  // namespace

std::pair<Panel, SimTruth> generate_cluster_var(const SimDesign& design) {
  if (!(design.a >= 0.0 && design.a < 1.0)) throw InputError("persistence a must lie in [0, 1)");
  if (design.clusters < 1) throw InputError("need at least one cluster");
  if (design.n < 4) throw InputError("sample size must be at least 4");
  if (design.burn_in < 0) throw InputError("burn-in must be nonnegative");
  const Eigen::MatrixXd h = structure_h(design.structure);
  const Eigen::MatrixXd a = cluster_autoregression(design.structure, design.a);
  const Index b = h.rows();
  const Eigen::MatrixXd hh = h * h.transpose();
  const Eigen::MatrixXd gamma = lyapunov_variance(a, hh);
  const Eigen::VectorXd scale = gamma.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd gamma_chol = Eigen::LLT<Eigen::MatrixXd>(gamma).matrixL();

  const Index k = b * design.clusters;
  Eigen::MatrixXd values(design.n, k);
  std::mt19937_64 rng(design.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(b);
  Eigen::VectorXd e(b);
  for (Index c = 0; c < design.clusters; ++c) {
    for (Index q = 0; q < b; ++q) e(q) = normal(rng);
    x = gamma_chol * e;
    for (Index t = -design.burn_in; t < design.n; ++t) {
      for (Index q = 0; q < b; ++q) e(q) = normal(rng);
      x = a * x + h * e;
      if (t >= 0) values.block(t, c * b, 1, b) = x.cwiseProduct(scale).transpose();
    }
  }
  if (design.transform) values = values.unaryExpr(design.transform);

  SimTruth truth;
  const Eigen::MatrixXd s = scale.asDiagonal();
  const Eigen::MatrixXd s_inv = scale.cwiseInverse().asDiagonal();
  truth.a = block_diagonal(s * a * s_inv, design.clusters);
  truth.sigma_eps = block_diagonal(s * hh * s, design.clusters);
  truth.gamma = block_diagonal(s * gamma * s, design.clusters);
  truth.theta11 = block_diagonal((s * hh * s).inverse(), design.clusters);
  truth.reference = block_reference_cpdag(design.structure, design.clusters);
  return {make_panel(std::move(values)), std::move(truth)};
}

Cpdag reference_cpdag(Structure s) {
  const Eigen::MatrixXd h = structure_h(s);
  PcConfig config;
  config.alpha = 1.0 - 1e-13;
  return pc_algorithm(h * h.transpose(), 1000000, config);
}

Cpdag block_reference_cpdag(Structure s, Index clusters) {
  const Cpdag one = reference_cpdag(s);
  const Index b = one.size();
  Cpdag out(b * clusters);
  for (Index c = 0; c < clusters; ++c) {
    for (const auto& e : one.edges()) {
      out.add_undirected(c * b + e.from, c * b + e.to);
      if (e.directed) out.orient(c * b + e.from, c * b + e.to);
    }
  }
  return out;
}

int shd(const Cpdag& g1, const Cpdag& g2) {
  if (g1.size() != g2.size()) throw InputError("graphs have different node sets");
  int count = 0;
  for (Index i = 0; i < g1.size(); ++i)
    for (Index j = i + 1; j < g1.size(); ++j)
      if (g1.type(i, j) != g2.type(i, j)) ++count;
  return count;
}

SupportConfusion support_confusion(const Eigen::MatrixXd& theta11_hat,
                                   const Eigen::MatrixXd& theta11_true, double tol) {
  return support_confusion(BoolMatrix(theta11_hat.array().abs() > tol), theta11_true, tol);
}

SupportConfusion support_confusion(const BoolMatrix& estimated, const Eigen::MatrixXd& theta11_true,
                                   double tol) {
  if (estimated.rows() != theta11_true.rows() || estimated.cols() != theta11_true.cols())
    throw InputError("support dimensions differ");
  SupportConfusion out;
  for (Index i = 0; i < estimated.rows(); ++i) {
    for (Index j = 0; j < estimated.cols(); ++j) {
      if (i == j) continue;
      const bool truth = std::abs(theta11_true(i, j)) > tol;
      if (estimated(i, j)) {
        ++out.tp_fp;
        if (!truth) ++out.fp;
      } else if (truth) {
        ++out.fn;
      }
    }
  }
  return out;
}

std::string_view to_string(BenchmarkVariant v) {
  switch (v) {
    case BenchmarkVariant::full: return "full";
    case BenchmarkVariant::dense: return "dense";
    case BenchmarkVariant::independent: return "independent";
  }
  return "full";
}

BenchmarkVariant parse_variant(std::string_view name) {
  for (auto v : {BenchmarkVariant::full, BenchmarkVariant::dense, BenchmarkVariant::independent})
    if (to_string(v) == name) return v;
  throw InputError("unknown benchmark variant '" + std::string(name) + "'");
}

namespace {

Metric summarize(const std::vector<double>& xs) {
  Metric m;
  if (xs.empty()) return m;
  m.available = true;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return m;
}

std::string_view policy_name(LambdaPolicy::Kind kind) {
  switch (kind) {
    case LambdaPolicy::Kind::cv: return "cv";
    case LambdaPolicy::Kind::fixed: return "fixed";
    case LambdaPolicy::Kind::two_sample_average: return "two_sample_average";
  }
  return "cv";
}

}  // namespace

BenchmarkRow run_benchmark(const BenchmarkConfig& config) {
  if (config.reps < 1) throw InputError("need at least one replication");
  BenchmarkRow row;
  row.config = config;

  double preset_lambda = config.lambda.value;
  if (config.variant == BenchmarkVariant::full &&
      config.lambda.kind == LambdaPolicy::Kind::two_sample_average) {
    // CV on two extra samples outside the replication seed range.
    double sum = 0.0;
    for (std::uint64_t extra = 0; extra < 2; ++extra) {
      SimDesign pilot = config.design;
      pilot.seed = config.design.seed + static_cast<std::uint64_t>(config.reps) + extra;
      sum += cross_validate(generate_cluster_var(pilot).first, 1, config.method).lambda;
    }
    preset_lambda = config.lambda.cv_multiplier * sum / 2.0;
  }

  std::vector<double> shds, tp_fp, fp, fn, a_dist, s_dist, lambdas;
  for (int r = 0; r < config.reps; ++r) {
    SimDesign design = config.design;
    design.seed = config.design.seed + static_cast<std::uint64_t>(r);
    const auto [panel, truth] = generate_cluster_var(design);
    BenchmarkReplicate rep;
    rep.seed = design.seed;

    PcConfig pc;
    pc.alpha = config.alpha;
    if (config.variant == BenchmarkVariant::independent) {
      const ScalingMatrix sigma = scaling_matrix(build_lagged(panel, 0));
      const Cpdag graph = pc_algorithm(sigma.sigma, static_cast<long>(panel.rows()), pc, panel.names);
      rep.shd = shd(graph, truth.reference);
      shds.push_back(rep.shd);
      row.replicates.push_back(rep);
      continue;
    }

    EstimateConfig ec;
    ec.lags = 1;
    ec.method = config.method;
    if (config.variant == BenchmarkVariant::dense) {
      ec.lambda = 0.0;
      ec.tau = 0.0;
    } else if (config.lambda.kind == LambdaPolicy::Kind::cv) {
      ec.lambda = config.lambda.cv_multiplier * cross_validate(panel, 1, config.method).lambda;
    } else {
      ec.lambda = preset_lambda;
    }
    const Estimate est = estimate(panel, ec);
    const Cpdag graph = discover_graph(est, pc, config.restricted_pc, panel.names);
    const Index k = panel.cols();
    rep.lambda = est.lambda;
    rep.shd = shd(graph, truth.reference);
    rep.confusion = support_confusion(BoolMatrix(est.precision.support.mask.topLeftCorner(k, k)),
                                      truth.theta11);
    rep.a_distance = operator_norm(est.var.a - truth.a);
    rep.sigma_distance = operator_norm(est.var.sigma_eps - truth.sigma_eps);
    shds.push_back(rep.shd);
    tp_fp.push_back(rep.confusion.tp_fp);
    fp.push_back(rep.confusion.fp);
    fn.push_back(rep.confusion.fn);
    a_dist.push_back(rep.a_distance);
    s_dist.push_back(rep.sigma_distance);
    lambdas.push_back(rep.lambda);
    row.replicates.push_back(rep);
  }
  row.shd = summarize(shds);
  row.tp_fp = summarize(tp_fp);
  row.fp = summarize(fp);
  row.fn = summarize(fn);
  row.a_distance = summarize(a_dist);
  row.sigma_distance = summarize(s_dist);
  row.lambda = summarize(lambdas);
  return row;
}

std::string benchmark_csv_header() {
  return "structure,a,clusters,n,method,variant,lambda_policy,lambda_multiplier,reps,alpha,"
         "shd_mean,shd_se,tp_fp_mean,tp_fp_se,fp_mean,fp_se,fn_mean,fn_se,"
         "a_dist_mean,a_dist_se,sigma_dist_mean,sigma_dist_se,lambda_mean,lambda_se\n";
}

std::string benchmark_csv_row(const BenchmarkRow& row) {
  const auto& c = row.config;
  std::ostringstream out;
  out << to_string(c.design.structure) << ',' << format_double(c.design.a) << ',' << c.design.clusters
      << ',' << c.design.n << ',' << to_string(c.method) << ',' << to_string(c.variant) << ','
      << policy_name(c.lambda.kind) << ',' << format_double(c.lambda.cv_multiplier) << ',' << c.reps
      << ',' << format_double(c.alpha);
  for (const Metric* m : {&row.shd, &row.tp_fp, &row.fp, &row.fn, &row.a_distance,
                          &row.sigma_distance, &row.lambda}) {
    if (m->available)
      out << ',' << format_double(m->mean) << ',' << format_double(m->std_error);
    else
      out << ",,";
  }
  out << '\n';
  return out.str();
}

nlohmann::json to_json(const BenchmarkRow& row) {
  const auto& c = row.config;
  auto metric = [](const Metric& m) {
    return m.available ? nlohmann::json{{"mean", m.mean}, {"std_error", m.std_error}}
                       : nlohmann::json(nullptr);
  };
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : row.replicates) {
    nlohmann::json j{{"seed", r.seed}, {"shd", r.shd}};
    if (c.variant != BenchmarkVariant::independent) {
      j["lambda"] = r.lambda;
      j["tp_fp"] = r.confusion.tp_fp;
      j["fp"] = r.confusion.fp;
      j["fn"] = r.confusion.fn;
      j["a_distance"] = r.a_distance;
      j["sigma_distance"] = r.sigma_distance;
    }
    reps.push_back(std::move(j));
  }
  return {{"structure", to_string(c.design.structure)},
          {"a", c.design.a},
          {"clusters", c.design.clusters},
          {"n", c.design.n},
          {"seed", c.design.seed},
          {"burn_in", c.design.burn_in},
          {"method", to_string(c.method)},
          {"variant", to_string(c.variant)},
          {"lambda_policy", policy_name(c.lambda.kind)},
          {"lambda_value", c.lambda.value},
          {"lambda_multiplier", c.lambda.cv_multiplier},
          {"reps", c.reps},
          {"alpha", c.alpha},
          {"restricted_pc", c.restricted_pc},
          {"shd", metric(row.shd)},
          {"tp_fp", metric(row.tp_fp)},
          {"fp", metric(row.fp)},
          {"fn", metric(row.fn)},
          {"a_distance", metric(row.a_distance)},
          {"sigma_distance", metric(row.sigma_distance)},
          {"lambda", metric(row.lambda)},
          {"replicates", std::move(reps)}};
}

}  // namespace gcvar
