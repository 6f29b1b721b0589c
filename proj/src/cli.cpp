#include "gcvar/cli.hpp"

#include "gcvar/errors.hpp"
#include "gcvar/io.hpp"
#include "gcvar/irf.hpp"
#include "gcvar/pipeline.hpp"
#include "gcvar/sim_harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <functional>
#include <sstream>

namespace gcvar::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(1, sep) : "") + parts[i];
  return out;
}

std::string join(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(format_double(v));
  return join(parts);
}

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0 && v < 1.0))
        return "value must lie strictly between 0 and 1";
      return {};
    },
    "(0,1)");

/// Effective run description written next to every output set. It holds the
/// canonical argument list (output directory excluded) so that a rerun can
/// regenerate the same files.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void arg(const std::string& flag) { args_.push_back(flag); }
  void arg(const std::string& flag, const std::string& value) {
    args_.push_back(flag);
    args_.push_back(value);
  }
  void arg(const std::string& flag, double value) { arg(flag, format_double(value)); }
  void arg(const std::string& flag, long long value) { arg(flag, std::to_string(value)); }

  json& parameters() { return parameters_; }
  void output(const std::string& name) { outputs_.push_back(name); }
  void warn(const std::string& text) { warnings_.push_back(text); }

  void write(const fs::path& dir) const {
    json j{{"tool", "gcvar"},
           {"version", kVersion},
           {"command", command_},
           {"args", args_},
           {"parameters", parameters_},
           {"outputs", outputs_},
           {"warnings", warnings_}};
    write_text(dir / "manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  json parameters_ = json::object();
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
};

struct DataArgs {
  std::string input;
  std::vector<std::string> diff;
};

void add_data(CLI::App* app, DataArgs& d, bool required = true) {
  auto* opt = app->add_option("--input", d.input, "Panel CSV with a header row of variable names");
  if (required) opt->required();
  app->add_option("--diff", d.diff, "Columns to first-difference")->delimiter(',');
}

void record_data(Manifest& m, const DataArgs& d) {
  m.arg("--input", d.input);
  if (!d.diff.empty()) m.arg("--diff", join(d.diff));
  m.parameters()["input"] = d.input;
  m.parameters()["difference_columns"] = d.diff;
}

Panel load_panel(const DataArgs& d) {
  return difference_columns(read_panel_csv(d.input), d.diff);
}

struct FitArgs {
  int lags = 1;
  std::string method = "lasso";
  double lambda = 0.05;
  double tau = 0.0;
  CLI::Option* tau_option = nullptr;
  bool cv = false;
  int folds = 5;
  std::vector<double> grid;
  int grid_size = 5;
  std::string indefinite = "abs-det";
};

void add_fit(CLI::App* app, FitArgs& f) {
  app->add_option("--lags", f.lags, "VAR lag order p")->check(CLI::Range(1, 1000));
  app->add_option("--method", f.method, "lasso or clime")->check(CLI::IsMember({"lasso", "clime"}));
  app->add_option("--lambda", f.lambda, "Penalty")->check(CLI::NonNegativeNumber);
  f.tau_option = app->add_option("--tau", f.tau, "Threshold (default 2 lambda)")->check(CLI::NonNegativeNumber);
  app->add_flag("--cv", f.cv, "Choose lambda by blocked cross-validation");
  app->add_option("--folds", f.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  app->add_option("--grid", f.grid, "Explicit lambda grid")->delimiter(',');
  app->add_option("--grid-size", f.grid_size, "Grid points below lambda_0")->check(CLI::Range(1, 60));
  app->add_option("--cv-indefinite", f.indefinite, "Score of an indefinite refit: abs-det or reject")
      ->check(CLI::IsMember({"abs-det", "reject"}));
}

IndefiniteFit parse_indefinite(const std::string& name) {
  return name == "reject" ? IndefiniteFit::reject : IndefiniteFit::abs_determinant;
}

EstimateConfig fit_config(const FitArgs& f) {
  EstimateConfig c;
  c.lags = f.lags;
  c.method = parse_method(f.method);
  c.lambda = f.lambda;
  if (f.tau_option->count() > 0) c.tau = f.tau;
  c.cross_validate = f.cv;
  c.cv_plan.n_folds = f.folds;
  c.cv_plan.lambda_grid = f.grid;
  c.cv_plan.grid_size = f.grid_size;
  c.cv_plan.indefinite = parse_indefinite(f.indefinite);
  if (!f.cv && c.lambda <= 0.0 && c.tau.value_or(0.0) != 0.0)
    throw InputError("lambda must be positive unless --cv is given or tau is 0");
  if (!f.cv && c.tau && *c.tau != 0.0 && *c.tau < c.lambda) throw InputError("tau must be at least lambda");
  return c;
}

void record_fit(Manifest& m, const FitArgs& f) {
  m.arg("--lags", static_cast<long long>(f.lags));
  m.arg("--method", f.method);
  if (f.cv) {
    m.arg("--cv");
    m.arg("--folds", static_cast<long long>(f.folds));
    if (!f.grid.empty()) m.arg("--grid", join(f.grid));
    m.arg("--grid-size", static_cast<long long>(f.grid_size));
    m.arg("--cv-indefinite", f.indefinite);
  } else {
    m.arg("--lambda", f.lambda);
    if (f.tau_option->count() > 0) m.arg("--tau", f.tau);
  }
}

std::vector<std::string> lagged_names(const std::vector<std::string>& names, int lags, int first = 0) {
  std::vector<std::string> out;
  for (int l = first; l <= lags; ++l)
    for (const auto& n : names) out.push_back(n + "_l" + std::to_string(l));
  return out;
}

json precision_json(const Estimate& est, const std::vector<std::string>& names) {
  const int p = est.sigma.lags;
  json j;
  j["method"] = to_string(est.precision.support.method);
  j["lags"] = p;
  j["lambda"] = est.lambda;
  j["tau"] = est.tau;
  j["effective_n"] = est.effective_n;
  j["variables"] = names;
  j["stacked"] = lagged_names(names, p);
  j["theta"] = matrix_to_json(est.precision.theta);
  j["theta11"] = matrix_to_json(est.precision.theta11());
  j["theta12"] = matrix_to_json(est.precision.theta12());
  j["a"] = matrix_to_json(est.var.a);
  j["sigma_eps"] = matrix_to_json(est.var.sigma_eps);
  j["spectral_radius"] = est.var.spectral_radius;
  Eigen::MatrixXd support = est.precision.support.mask.cast<double>();
  j["support"] = matrix_to_json(support);
  return j;
}

Estimate write_estimate(const Panel& panel, const FitArgs& f, const fs::path& out, Manifest& m) {
  const Estimate est = estimate(panel, fit_config(f));
  const auto stacked = lagged_names(panel.names, f.lags);
  write_text(out / "sigma.csv", matrix_csv(est.sigma.sigma, stacked, stacked));
  write_text(out / "theta.csv", matrix_csv(est.precision.theta, stacked, stacked));
  write_text(out / "a_hat.csv", matrix_csv(est.var.a, panel.names, lagged_names(panel.names, f.lags, 1)));
  write_text(out / "sigma_eps.csv", matrix_csv(est.var.sigma_eps, panel.names, panel.names));
  write_text(out / "precision.json", precision_json(est, panel.names).dump(2) + "\n");
  for (const char* name : {"sigma.csv", "theta.csv", "a_hat.csv", "sigma_eps.csv", "precision.json"})
    m.output(name);
  if (est.cv) {
    write_text(out / "cv.json", to_json(*est.cv).dump(2) + "\n");
    m.output("cv.json");
  }
  m.parameters()["lambda"] = est.lambda;
  m.parameters()["tau"] = est.tau;
  m.parameters()["effective_n"] = est.effective_n;
  m.parameters()["spectral_radius"] = est.var.spectral_radius;
  return est;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir);
  return fs::path(dir);
}

Index variable_index(const std::vector<std::string>& names, const std::string& key) {
  const auto it = std::find(names.begin(), names.end(), key);
  if (it != names.end()) return static_cast<Index>(it - names.begin());
  long v = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (ec == std::errc() && ptr == key.data() + key.size() && v >= 1 &&
      v <= static_cast<long>(names.size()))
    return v - 1;
  throw InputError("unknown variable '" + key + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian copula VAR: estimation, causal graph discovery, impulse responses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string out_dir;
  std::function<void()> action;

  // estimate
  DataArgs est_data;
  FitArgs est_fit;
  auto* est_cmd = app.add_subcommand("estimate", "Scaling matrix, sparse precision and VAR parameters");
  add_data(est_cmd, est_data);
  add_fit(est_cmd, est_fit);
  est_cmd->add_option("--out", out_dir, "Output directory")->required();
  est_cmd->callback([&] {
    action = [&] {
      Manifest m("estimate");
      record_data(m, est_data);
      record_fit(m, est_fit);
      const auto dir = prepare_out(out_dir);
      write_estimate(load_panel(est_data), est_fit, dir, m);
      m.write(dir);
    };
  });

  // dag
  DataArgs dag_data;
  FitArgs dag_fit;
  double alpha = 0.01;
  bool restricted = true;
  auto* dag_cmd = app.add_subcommand("dag", "Estimate, then PC on the innovation covariance and SVAR recovery");
  add_data(dag_cmd, dag_data);
  add_fit(dag_cmd, dag_fit);
  dag_cmd->add_option("--alpha", alpha, "PC significance level")->check(kOpenUnit);
  dag_cmd->add_flag("--restricted-pc,!--no-restricted-pc", restricted,
                    "Use zeros of theta11 as fixed gaps (default on)");
  dag_cmd->add_option("--out", out_dir, "Output directory")->required();
  dag_cmd->callback([&] {
    action = [&] {
      Manifest m("dag");
      record_data(m, dag_data);
      record_fit(m, dag_fit);
      m.arg("--alpha", alpha);
      m.arg(restricted ? "--restricted-pc" : "--no-restricted-pc");
      m.parameters()["alpha"] = alpha;
      m.parameters()["restricted_pc"] = restricted;
      const auto dir = prepare_out(out_dir);
      const Panel panel = load_panel(dag_data);
      const Estimate est = write_estimate(panel, dag_fit, dir, m);
      PcConfig pc;
      pc.alpha = alpha;
      const Cpdag graph = discover_graph(est, pc, restricted, panel.names);
      write_text(dir / "graph.dot", to_dot(graph));
      write_text(dir / "graph.json", to_json(graph).dump(2) + "\n");
      m.output("graph.dot");
      m.output("graph.json");
      for (const auto& w : graph.warnings()) m.warn(w);
      std::error_code ec;
      fs::remove(dir / "structural.json", ec);
      fs::remove(dir / "d_hat.csv", ec);
      if (graph.fully_directed()) {
        const StructuralModel model = identify(est, graph);
        write_text(dir / "structural.json", to_json(model).dump(2) + "\n");
        std::vector<std::string> ordered;
        for (Index v : model.order) ordered.push_back(panel.names[static_cast<std::size_t>(v)]);
        write_text(dir / "d_hat.csv", matrix_csv(model.d, ordered, ordered));
        m.output("structural.json");
        m.output("d_hat.csv");
        m.parameters()["identified"] = true;
        m.parameters()["xi_offdiag_residual"] = model.xi_offdiag_residual;
      } else {
        m.parameters()["identified"] = false;
        m.warn("graph has undirected edges; structural model not identified and not written");
      }
      for (const auto& w : graph.warnings()) err << "warning: " << w << '\n';
      if (!graph.fully_directed())
        err << "warning: graph has undirected edges; structural model not identified\n";
      m.write(dir);
    };
  });

  // irf
  DataArgs irf_data;
  std::string model_dir;
  std::string shock;
  std::vector<std::string> responses;
  double delta = 1.0;
  int horizon = 10;
  int draws = 10000;
  std::uint64_t seed = 0;
  std::string mode = "linearized";
  bool gaussian = false;
  bool unit_variance = false;
  std::vector<double> condition;
  auto* irf_cmd = app.add_subcommand("irf", "Impulse responses from a recovered structural model");
  add_data(irf_cmd, irf_data, false);
  irf_cmd->add_option("--model", model_dir, "Directory holding structural.json (default: --out)");
  irf_cmd->add_option("--shock", shock, "Shocked variable (name or 1-based index)")->required();
  irf_cmd->add_option("--response", responses, "Response variables (default: all)")->delimiter(',');
  irf_cmd->add_option("--delta", delta, "Shock size");
  irf_cmd->add_option("--horizon", horizon, "Largest horizon")->check(CLI::Range(0, 100000));
  irf_cmd->add_option("--draws", draws, "Monte Carlo draws")->check(CLI::Range(1, 100000000));
  irf_cmd->add_option("--seed", seed, "Random seed");
  irf_cmd->add_option("--mode", mode, "linearized, conditional or unconditional")
      ->check(CLI::IsMember({"linearized", "conditional", "unconditional"}));
  irf_cmd->add_flag("--gaussian", gaussian, "Treat the observed marginals as standard normal");
  irf_cmd->add_flag("--unit-variance", unit_variance, "Scale the linearized shock by Sigma_xi^{1/2}");
  irf_cmd->add_option("--condition", condition, "Conditioning point, pK values (default: last rows of --input)")
      ->delimiter(',');
  irf_cmd->add_option("--out", out_dir, "Output directory")->required();
  irf_cmd->callback([&] {
    action = [&] {
      Manifest m("irf");
      const fs::path from = model_dir.empty() ? fs::path(out_dir) : fs::path(model_dir);
      if (!model_dir.empty()) m.arg("--model", model_dir);
      if (!irf_data.input.empty()) record_data(m, irf_data);
      m.arg("--shock", shock);
      if (!responses.empty()) m.arg("--response", join(responses));
      m.arg("--delta", delta);
      m.arg("--horizon", static_cast<long long>(horizon));
      m.arg("--mode", mode);
      const IrfMode irf_mode = parse_irf_mode(mode);
      if (irf_mode != IrfMode::linearized) {
        m.arg("--draws", static_cast<long long>(draws));
        m.arg("--seed", std::to_string(seed));
        if (gaussian) m.arg("--gaussian");
        if (!condition.empty()) m.arg("--condition", join(condition));
      }
      if (unit_variance) m.arg("--unit-variance");

      if (!fs::exists(from / "structural.json")) {
        if (fs::exists(from / "graph.json"))
          throw IdentificationError("graph in " + from.string() +
                                    " is not fully directed; no structural model to shock");
        throw InputError("no structural model in " + from.string() + "; run dag first");
      }
      const StructuralModel model = structural_model_from_json(json::parse(read_text(from / "structural.json")));
      const auto dir = prepare_out(out_dir);

      IrfRequest req;
      req.shock = variable_index(model.names, shock);
      req.delta = delta;
      req.horizon = horizon;
      req.draws = draws;
      req.seed = seed;
      req.mode = irf_mode;
      req.unit_variance_shock = unit_variance;
      std::vector<MarginalTransform> marginals;
      if (irf_mode != IrfMode::linearized) {
        if (!gaussian) {
          if (irf_data.input.empty())
            throw InputError("Monte Carlo responses need --input for the marginals, or --gaussian");
          const Panel panel = load_panel(irf_data);
          if (panel.names != model.names) throw InputError("input columns do not match the structural model");
          marginals = empirical_marginals(panel.values);
          if (irf_mode == IrfMode::conditional && condition.empty()) {
            const int p = std::max(model.lags(), 1);
            for (int l = 0; l < p; ++l)
              for (Index q = 0; q < panel.cols(); ++q)
                condition.push_back(panel.values(panel.rows() - 1 - l, q));
          }
        }
        if (irf_mode == IrfMode::conditional) {
          if (condition.empty()) throw InputError("conditional responses need --condition or --input");
          req.condition = Eigen::Map<const Eigen::VectorXd>(condition.data(), static_cast<Index>(condition.size()));
        }
      }
      std::vector<Index> targets;
      if (responses.empty())
        for (Index k = 0; k < model.size(); ++k) targets.push_back(k);
      else
        for (const auto& r : responses) targets.push_back(variable_index(model.names, r));

      std::ostringstream csv;
      csv << "horizon,shock,response,value,mc_stderr\n";
      for (Index k : targets) {
        req.response = k;
        const IrfResult res = impulse_response(model, marginals, req);
        for (std::size_t s = 0; s < res.value.size(); ++s) {
          csv << s << ',' << model.names[static_cast<std::size_t>(req.shock)] << ','
              << model.names[static_cast<std::size_t>(k)] << ',' << format_double(res.value[s]) << ',';
          if (irf_mode != IrfMode::linearized) csv << format_double(res.std_error[s]);
          csv << '\n';
        }
      }
      write_text(dir / "irf.csv", csv.str());
      m.output("irf.csv");
      m.parameters()["mode"] = mode;
      m.parameters()["seed"] = seed;
      m.parameters()["draws"] = irf_mode == IrfMode::linearized ? 0 : draws;
      m.parameters()["order"] = to_json(model)["order"];
      m.write(dir);
    };
  });

  // cv
  DataArgs cv_data;
  FitArgs cv_fit;
  auto* cv_cmd = app.add_subcommand("cv", "Blocked cross-validation of lambda (tau = 2 lambda)");
  add_data(cv_cmd, cv_data);
  add_fit(cv_cmd, cv_fit);
  cv_cmd->add_option("--out", out_dir, "Output directory")->required();
  cv_cmd->callback([&] {
    action = [&] {
      Manifest m("cv");
      record_data(m, cv_data);
      cv_fit.cv = true;
      record_fit(m, cv_fit);
      const auto dir = prepare_out(out_dir);
      CvPlan plan;
      plan.n_folds = cv_fit.folds;
      plan.lambda_grid = cv_fit.grid;
      plan.grid_size = cv_fit.grid_size;
      plan.indefinite = parse_indefinite(cv_fit.indefinite);
      const CvResult res = cross_validate(load_panel(cv_data), cv_fit.lags, parse_method(cv_fit.method), plan);
      const std::string text = to_json(res).dump(2) + "\n";
      write_text(dir / "cv.json", text);
      out << text;
      m.output("cv.json");
      m.parameters()["lambda"] = res.lambda;
      m.parameters()["tau"] = res.tau;
      m.write(dir);
    };
  });

  // aic
  DataArgs aic_data;
  int max_lags = 4;
  std::string aic_method = "lasso";
  double aic_lambda = 0.0;
  double aic_tau = 0.0;
  auto* aic_cmd = app.add_subcommand("aic", "Lag order by AIC on a common sample");
  add_data(aic_cmd, aic_data);
  aic_cmd->add_option("--max-lags", max_lags, "Largest lag order")->check(CLI::Range(1, 1000));
  aic_cmd->add_option("--method", aic_method, "lasso or clime")->check(CLI::IsMember({"lasso", "clime"}));
  auto* aic_lambda_opt = aic_cmd->add_option("--lambda", aic_lambda, "Penalty (default: CV at p = 1)")
                             ->check(CLI::NonNegativeNumber);
  auto* aic_tau_opt = aic_cmd->add_option("--tau", aic_tau, "Threshold (default 2 lambda)")
                          ->check(CLI::NonNegativeNumber);
  aic_cmd->add_option("--out", out_dir, "Output directory")->required();
  aic_cmd->callback([&] {
    action = [&] {
      Manifest m("aic");
      record_data(m, aic_data);
      m.arg("--max-lags", static_cast<long long>(max_lags));
      m.arg("--method", aic_method);
      if (aic_lambda_opt->count() > 0) m.arg("--lambda", aic_lambda);
      if (aic_tau_opt->count() > 0) m.arg("--tau", aic_tau);
      const auto dir = prepare_out(out_dir);
      const Panel panel = load_panel(aic_data);
      const Method method = parse_method(aic_method);
      double lambda = aic_lambda;
      if (aic_lambda_opt->count() == 0) lambda = cross_validate(panel, 1, method).lambda;
      std::optional<double> tau;
      if (aic_tau_opt->count() > 0) tau = aic_tau;
      const AicResult res = aic_lag_order(panel, max_lags, method, lambda, tau);
      json j = to_json(res);
      j["lambda"] = lambda;
      j["tau"] = tau.value_or(2.0 * lambda);
      const std::string text = j.dump(2) + "\n";
      write_text(dir / "aic.json", text);
      out << text;
      m.output("aic.json");
      m.parameters()["lambda"] = lambda;
      m.parameters()["selected_lags"] = res.selected;
      m.write(dir);
    };
  });

  // simulate
  std::string structure = "v_structure";
  double persistence = 0.25;
  Index clusters = 3;
  Index n = 5000;
  std::uint64_t sim_seed = 1;
  int burn_in = 500;
  int reps = 50;
  std::string sim_method = "lasso";
  std::vector<std::string> variants{"full"};
  std::string policy = "cv";
  double sim_lambda = 0.05;
  double multiplier = 1.0;
  double sim_alpha = 0.01;
  bool sim_restricted = true;
  bool panel_only = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Cluster VAR simulation and benchmark table");
  sim_cmd->add_option("--structure", structure, "chain, common_cause, v_structure, diamond1, diamond2")
      ->check(CLI::IsMember({"chain", "common_cause", "v_structure", "diamond1", "diamond2", "independent"}));
  sim_cmd->add_option("--a", persistence, "Persistence of the cluster autoregression")->check(CLI::Range(0.0, 0.999999));
  sim_cmd->add_option("--clusters", clusters, "Number of clusters")->check(CLI::Range(1, 100000));
  sim_cmd->add_option("--n", n, "Sample size")->check(CLI::Range(4, 100000000));
  sim_cmd->add_option("--seed", sim_seed, "Seed of the first replication");
  sim_cmd->add_option("--burn-in", burn_in, "Burn-in steps")->check(CLI::Range(0, 100000000));
  sim_cmd->add_option("--reps", reps, "Replications")->check(CLI::Range(1, 1000000));
  sim_cmd->add_option("--method", sim_method, "lasso or clime")->check(CLI::IsMember({"lasso", "clime"}));
  sim_cmd->add_option("--variant", variants, "full, dense, independent")
      ->delimiter(',')
      ->check(CLI::IsMember({"full", "dense", "independent"}));
  sim_cmd->add_option("--lambda-policy", policy, "cv, fixed or average")
      ->check(CLI::IsMember({"cv", "fixed", "average"}));
  sim_cmd->add_option("--lambda", sim_lambda, "Fixed lambda")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--lambda-multiplier", multiplier, "Multiplier on the CV lambda")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--alpha", sim_alpha, "PC significance level")->check(kOpenUnit);
  sim_cmd->add_flag("--restricted-pc,!--no-restricted-pc", sim_restricted, "Fixed gaps from theta11 (default on)");
  sim_cmd->add_flag("--panel-only", panel_only, "Write one simulated panel and its truth instead of a benchmark");
  sim_cmd->add_option("--out", out_dir, "Output directory")->required();
  sim_cmd->callback([&] {
    action = [&] {
      Manifest m("simulate");
      m.arg("--structure", structure);
      m.arg("--a", persistence);
      m.arg("--clusters", static_cast<long long>(clusters));
      m.arg("--n", static_cast<long long>(n));
      m.arg("--seed", std::to_string(sim_seed));
      m.arg("--burn-in", static_cast<long long>(burn_in));
      SimDesign design;
      design.structure = parse_structure(structure);
      design.a = persistence;
      design.clusters = clusters;
      design.n = n;
      design.seed = sim_seed;
      design.burn_in = burn_in;
      const auto dir = prepare_out(out_dir);
      if (panel_only) {
        m.arg("--panel-only");
        const auto [panel, truth] = generate_cluster_var(design);
        write_panel_csv(panel, dir / "panel.csv");
        json t{{"names", panel.names},
               {"a", matrix_to_json(truth.a)},
               {"sigma_eps", matrix_to_json(truth.sigma_eps)},
               {"gamma", matrix_to_json(truth.gamma)},
               {"theta11", matrix_to_json(truth.theta11)},
               {"reference", to_json(truth.reference)}};
        write_text(dir / "truth.json", t.dump(2) + "\n");
        m.output("panel.csv");
        m.output("truth.json");
        m.write(dir);
        return;
      }
      m.arg("--reps", static_cast<long long>(reps));
      m.arg("--method", sim_method);
      m.arg("--variant", join(variants));
      m.arg("--lambda-policy", policy);
      if (policy == "fixed") m.arg("--lambda", sim_lambda);
      else m.arg("--lambda-multiplier", multiplier);
      m.arg("--alpha", sim_alpha);
      m.arg(sim_restricted ? "--restricted-pc" : "--no-restricted-pc");
      std::string csv = benchmark_csv_header();
      json rows = json::array();
      for (const auto& v : variants) {
        BenchmarkConfig config;
        config.design = design;
        config.method = parse_method(sim_method);
        config.variant = parse_variant(v);
        config.lambda.kind = policy == "cv"      ? LambdaPolicy::Kind::cv
                             : policy == "fixed" ? LambdaPolicy::Kind::fixed
                                                 : LambdaPolicy::Kind::two_sample_average;
        config.lambda.value = sim_lambda;
        config.lambda.cv_multiplier = multiplier;
        config.reps = reps;
        config.alpha = sim_alpha;
        config.restricted_pc = sim_restricted;
        const BenchmarkRow row = run_benchmark(config);
        csv += benchmark_csv_row(row);
        rows.push_back(to_json(row));
      }
      write_text(dir / "benchmark.csv", csv);
      write_text(dir / "benchmark.json", rows.dump(2) + "\n");
      out << csv;
      m.output("benchmark.csv");
      m.output("benchmark.json");
      m.write(dir);
    };
  });

  // rerun
  std::string manifest_path;
  auto* rerun_cmd = app.add_subcommand("rerun", "Repeat a run recorded in a manifest");
  rerun_cmd->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun_cmd->add_option("--out", out_dir, "Output directory")->required();
  int rerun_code = 0;
  rerun_cmd->callback([&] {
    action = [&] {
      const json mf = json::parse(read_text(manifest_path));
      std::vector<std::string> again{mf.at("command").get<std::string>()};
      for (const auto& a : mf.at("args")) again.push_back(a.get<std::string>());
      again.push_back("--out");
      again.push_back(out_dir);
      if (again.front() == "rerun") throw InputError("manifest records a rerun");
      rerun_code = run(again, out, err);
    };
  });

  std::vector<const char*> argv{"gcvar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
    return rerun_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace gcvar::cli
