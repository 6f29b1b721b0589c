// Acceptance suite: one PASS/FAIL line per criterion. Criterion 9 (K = 150)
// is slow and only runs when selected with --only.

#include "gcvar/cli.hpp"
#include "gcvar/io.hpp"
#include "gcvar/irf.hpp"
#include "gcvar/pipeline.hpp"
#include "gcvar/sim_harness.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gcvar;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string fmt(const char* pattern, auto... values) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, values...);
  return buf;
}

BenchmarkRow benchmark(double a, Index clusters, BenchmarkVariant variant, int reps) {
  BenchmarkConfig c;
  c.design.structure = Structure::v_structure;
  c.design.a = a;
  c.design.clusters = clusters;
  c.design.n = 5000;
  c.design.seed = 1;
  c.method = Method::lasso;
  c.variant = variant;
  c.lambda.kind = LambdaPolicy::Kind::cv;
  c.reps = reps;
  return run_benchmark(c);
}

/// The low-dimensional design shared by criteria 5, 6 and 8.
const BenchmarkRow& low_dimensional_row() {
  static const BenchmarkRow row = benchmark(0.25, 3, BenchmarkVariant::full, 50);
  return row;
}

Verdict oracle_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Eigen::MatrixXd s = testing::random_correlation(10, seed, 0.3);
    const SupportPattern full{BoolMatrix::Constant(10, 10, true), Method::lasso};
    const Eigen::MatrixXd theta = refit_precision(s, full, 5).theta;
    const Eigen::MatrixXd dense = s.llt().solve(Eigen::MatrixXd::Identity(10, 10));
    worst = std::max(worst, (theta - dense).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("max |refit - inverse| = %.3g over 100 inputs", worst)};
}

Verdict lasso_kkt() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Eigen::MatrixXd s = testing::random_correlation(20, 1000 + seed, 0.2);
    const double lambda = 0.02 + 0.004 * static_cast<double>(seed % 40);
    for (Index i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = lasso_neighborhood(s, i, lambda);
      const Eigen::VectorXd g = s.col(i) - s * x;
      for (Index j = 0; j < 20; ++j) {
        if (j == i) {
          worst = std::max(worst, std::abs(x(j)));
          continue;
        }
        const double v = x(j) != 0.0 ? std::abs(g(j) - lambda * (x(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g(j)) - lambda);
        worst = std::max(worst, v);
      }
    }
  }
  return {worst <= 1e-6, fmt("largest optimality violation %.3g over 1000 columns", worst)};
}

Verdict clime_checks() {
  double worst_feas = 0.0;
  double worst_gap = -1e300;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index d = 12;
    const Eigen::MatrixXd s = testing::random_correlation(d, 2000 + seed, 0.3);
    const Eigen::MatrixXd inverse = s.llt().solve(Eigen::MatrixXd::Identity(d, d));
    const double lambda = 0.02 + 0.01 * static_cast<double>(seed % 5);
    for (Index i = 0; i < d; ++i) {
      const Eigen::VectorXd w = clime_column(s, i, lambda);
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, i);
      worst_feas = std::max(worst_feas, (s * w - e).cwiseAbs().maxCoeff() - lambda);
      if ((s * inverse.col(i) - e).cwiseAbs().maxCoeff() <= lambda)
        worst_gap = std::max(worst_gap, w.lpNorm<1>() - inverse.col(i).lpNorm<1>());
    }
  }
  const bool pass = worst_feas <= 1e-8 && worst_gap <= 1e-9;
  return {pass, fmt("max constraint excess %.3g, max objective gap to inverse %.3g", worst_feas, worst_gap)};
}

Cpdag expected_class(Structure s) {
  const Index k = cluster_size(s);
  Cpdag g(k);
  auto arrow = [&](Index from, Index to) {
    g.add_undirected(from, to);
    g.orient(from, to);
  };
  switch (s) {
    case Structure::chain:
    case Structure::common_cause:
      g.add_undirected(0, 1);
      g.add_undirected(1, 2);
      break;
    case Structure::v_structure: arrow(0, 2); arrow(1, 2); break;
    case Structure::diamond1: arrow(0, 2); arrow(1, 2); arrow(0, 3); arrow(1, 3); break;
    case Structure::diamond2: arrow(0, 2); arrow(1, 2); arrow(2, 3); break;
    case Structure::independent: break;
  }
  return g;
}

Verdict population_cpdag() {
  std::string detail;
  bool pass = true;
  for (Structure s : {Structure::chain, Structure::common_cause, Structure::v_structure, Structure::diamond1,
                      Structure::diamond2}) {
    // Unit-variance structural shocks: the innovation covariance is the
    // integer matrix H H', exact in floating point. At this level an edge is
    // only removed when the partial correlation is below about 1e-16.
    const Eigen::MatrixXd h = structure_h(s);
    PcConfig config;
    config.alpha = 1.0 - 1e-13;
    const Cpdag g = pc_algorithm(h * h.transpose(), 1000000, config);
    const bool ok = g == expected_class(s);
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(s)) + (ok ? " ok" : " MISMATCH");
  }
  return {pass, detail};
}

Verdict low_dimensional_shd() {
  const BenchmarkRow& row = low_dimensional_row();
  return {row.shd.mean <= 0.5, fmt("mean SHD %.3f (se %.3f) over 50 reps", row.shd.mean, row.shd.std_error)};
}

Verdict support_recovery() {
  const BenchmarkRow& row = low_dimensional_row();
  const BenchmarkRow dense = benchmark(0.25, 3, BenchmarkVariant::dense, 50);
  bool dense_exact = true;
  for (const auto& r : dense.replicates)
    dense_exact = dense_exact && r.confusion.tp_fp == 72 && r.confusion.fp == 54 && r.confusion.fn == 0;
  const bool pass = row.fp.mean <= 1.0 && row.fn.mean <= 0.5 && dense_exact;
  return {pass, fmt("CV: mean FP %.2f, mean FN %.2f; dense 72/54/0 in every rep: %s", row.fp.mean, row.fn.mean,
                    dense_exact ? "yes" : "no")};
}

Verdict benchmark_degradation() {
  const BenchmarkRow independent = benchmark(0.75, 3, BenchmarkVariant::independent, 50);
  const BenchmarkRow full = benchmark(0.75, 3, BenchmarkVariant::full, 50);
  const bool pass = independent.shd.mean >= 5.0 && full.shd.mean <= 1.0;
  return {pass, fmt("A = 0 benchmark mean SHD %.3f, full method mean SHD %.3f", independent.shd.mean, full.shd.mean)};
}

Verdict parameter_distances() {
  const BenchmarkRow& row = low_dimensional_row();
  const bool pass = row.a_distance.mean <= 0.2 && row.sigma_distance.mean <= 0.1;
  return {pass, fmt("mean |A_hat - A|_op %.4f, mean |Sigma_hat - Sigma|_op %.4f", row.a_distance.mean,
                    row.sigma_distance.mean)};
}

Verdict high_dimensional() {
  const BenchmarkRow row = benchmark(0.75, 50, BenchmarkVariant::full, 5);
  return {row.shd.mean <= 2.0, fmt("K = 150: mean SHD %.3f over 5 reps, mean lambda %.4g", row.shd.mean, row.lambda.mean)};
}

Verdict irf_consistency() {
  SimDesign d;
  d.clusters = 1;
  d.n = 10;
  const SimTruth truth = generate_cluster_var(d).second;
  StructuralModel model = structural_coefficients(truth.sigma_eps, truth.reference);
  model.a = truth.a;
  const std::vector<MarginalTransform> gaussian(3, MarginalTransform::identity());
  double worst_ratio = 0.0;
  bool zero_exact = true;
  bool within = true;
  for (IrfMode mode : {IrfMode::unconditional, IrfMode::conditional}) {
    IrfRequest q;
    q.mode = mode;
    q.draws = 10000;
    q.horizon = 10;
    q.seed = 2024;
    q.condition = Eigen::Vector3d(0.5, -0.3, 1.2);
    for (Index l = 0; l < 3; ++l)
      for (Index k = 0; k < 3; ++k) {
        q.shock = l;
        q.response = k;
        q.delta = 0.1;
        const IrfResult mc = irf_mc(model, gaussian, q);
        const IrfResult lin = irf_linearized(model, q);
        for (std::size_t s = 0; s < lin.value.size(); ++s) {
          const double gap = std::abs(mc.value[s] - lin.value[s]);
          within = within && gap <= 3.0 * mc.std_error[s] + 1e-12;
          worst_ratio = std::max(worst_ratio, gap / (3.0 * mc.std_error[s] + 1e-12));
        }
        q.delta = 0.0;
        for (double v : irf_mc(model, gaussian, q).value) zero_exact = zero_exact && v == 0.0;
      }
  }
  return {within && zero_exact, fmt("max |MC - linearized| / (3 se + 1e-12) = %.3g; delta = 0 exactly zero: %s",
                                    worst_ratio, zero_exact ? "yes" : "no")};
}

Verdict rank_invariance() {
  SimDesign d;
  d.a = 0.5;
  d.seed = 11;
  const Panel plain = generate_cluster_var(d).first;
  Panel bent = plain;
  bent.values = plain.values.array().exp().matrix();
  EstimateConfig config;
  config.cross_validate = true;
  const Estimate e1 = estimate(plain, config);
  const Estimate e2 = estimate(bent, config);
  const Cpdag g1 = discover_graph(e1, PcConfig{}, true, plain.names);
  const Cpdag g2 = discover_graph(e2, PcConfig{}, true, bent.names);
  const bool sigma_same = e1.sigma.sigma == e2.sigma.sigma;
  const bool theta_same = e1.precision.theta == e2.precision.theta;
  const bool graph_same = g1 == g2 && to_json(g1).dump() == to_json(g2).dump();
  bool d_same = false;
  if (g1.fully_directed() && g2.fully_directed()) d_same = identify(e1, g1).d == identify(e2, g2).d;
  const bool pass = sigma_same && theta_same && graph_same && d_same;
  return {pass, fmt("Sigma %s, Theta %s, CPDAG %s, D %s", sigma_same ? "equal" : "DIFFER",
                    theta_same ? "equal" : "DIFFER", graph_same ? "equal" : "DIFFER", d_same ? "equal" : "DIFFER")};
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files[entry.path().filename().string()] = read_text(entry.path());
  return files;
}

Verdict determinism() {
  testing::TempDir tmp("acceptance_rerun");
  std::ostringstream sink;
  auto call = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  const std::string data = tmp.str("data");
  if (call({"simulate", "--panel-only", "--clusters", "1", "--n", "2000", "--seed", "3", "--out", data}) != 0)
    return {false, "could not simulate the input panel"};
  const std::string panel = data + "/panel.csv";
  const std::string dag_dir = tmp.str("dag");

  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"simulate", {"simulate", "--panel-only", "--clusters", "2", "--n", "500", "--seed", "9"}},
      {"simulate", {"simulate", "--reps", "2", "--n", "1000", "--variant", "full,dense,independent"}},
      {"estimate", {"estimate", "--input", panel, "--lambda", "0.05"}},
      {"estimate", {"estimate", "--input", panel, "--cv", "--method", "clime", "--lags", "2"}},
      {"dag", {"dag", "--input", panel, "--cv"}},
      {"irf", {"irf", "--model", dag_dir, "--shock", "X1"}},
      {"irf", {"irf", "--model", dag_dir, "--input", panel, "--shock", "X2", "--mode", "conditional", "--draws",
               "500", "--seed", "7"}},
      {"irf", {"irf", "--model", dag_dir, "--input", panel, "--shock", "X1", "--mode", "unconditional", "--draws",
               "500", "--seed", "7"}},
      {"cv", {"cv", "--input", panel}},
      {"aic", {"aic", "--input", panel, "--max-lags", "3"}},
  };
  std::set<std::string> covered;
  int index = 0;
  for (const auto& [command, args] : runs) {
    const std::string first = command == "dag" ? dag_dir : tmp.str("run" + std::to_string(index));
    const std::string second = tmp.str("rerun" + std::to_string(index));
    ++index;
    std::vector<std::string> with_out = args;
    with_out.push_back("--out");
    with_out.push_back(first);
    if (call(with_out) != 0) return {false, command + " failed"};
    if (call({"rerun", "--manifest", first + "/manifest.json", "--out", second}) != 0)
      return {false, command + " rerun failed"};
    if (directory_bytes(first) != directory_bytes(second)) return {false, command + " outputs differ on rerun"};
    covered.insert(command);
  }
  return {covered.size() == 6, fmt("%d runs over %zu subcommands reproduced byte for byte", index, covered.size())};
}

std::vector<Criterion> criteria() {
  return {
      {1, "oracle equivalence of the full-support refit", 1.0, oracle_equivalence},
      {2, "Lasso optimality conditions", 5.0, lasso_kkt},
      {3, "CLIME feasibility and optimality", 30.0, clime_checks},
      {4, "population CPDAG recovery", 1.0, population_cpdag},
      {5, "low-dimensional SHD, v-structure K=9, a=0.25", 600.0, low_dimensional_shd},
      {6, "support recovery and dense benchmark", 600.0, support_recovery},
      {7, "A=0 benchmark degradation at a=0.75", 600.0, benchmark_degradation},
      {8, "parameter distances", 600.0, parameter_distances},
      {9, "high-dimensional spot check, K=150", 1800.0, high_dimensional},
      {10, "Monte Carlo versus linearized impulse responses", 10.0, irf_consistency},
      {11, "rank invariance under exp", 60.0, rank_invariance},
      {12, "CLI determinism through manifests", 120.0, determinism},
  };
}

std::set<int> parse_selection(const std::string& text) {
  std::set<int> ids;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) ids.insert(std::stoi(part));
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selection;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      selection = parse_selection(argv[++i]);
    } else if (arg == "--all") {
      for (const auto& c : criteria()) selection.insert(c.id);
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--all]\n";
      return 2;
    }
  }
  if (selection.empty())
    for (const auto& c : criteria())
      if (c.id != 9) selection.insert(c.id);

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!selection.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      v.pass = false;
      v.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " -- " << v.detail
              << fmt(" (%.2f s)", seconds) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
