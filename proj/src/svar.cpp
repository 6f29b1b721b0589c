#include "gcvar/svar.hpp"

#include "gcvar/errors.hpp"
#include "gcvar/io.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace gcvar {

std::vector<std::vector<Index>> parent_sets(const Cpdag& dag) {
  if (!dag.fully_directed())
    throw IdentificationError("CPDAG not fully directed; SVAR not identified");
  std::vector<std::vector<Index>> out;
  for (Index i = 0; i < dag.size(); ++i) out.push_back(dag.parents(i));
  return out;
}

std::vector<Index> topological_order(const Cpdag& dag) {
  const Index k = dag.size();
  std::vector<int> indegree(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (dag.directed(i, j)) ++indegree[static_cast<std::size_t>(j)];
  std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
  for (Index i = 0; i < k; ++i)
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push(i);
  std::vector<Index> order;
  while (!ready.empty()) {
    const Index v = ready.top();
    ready.pop();
    order.push_back(v);
    for (Index j = 0; j < k; ++j)
      if (dag.directed(v, j) && --indegree[static_cast<std::size_t>(j)] == 0) ready.push(j);
  }
  if (static_cast<Index>(order.size()) != k) throw IdentificationError("not a DAG");
  return order;
}

Eigen::MatrixXd permutation_matrix(const std::vector<Index>& order) {
  const auto k = static_cast<Index>(order.size());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(k, k);
  for (Index r = 0; r < k; ++r) pi(r, order[static_cast<std::size_t>(r)]) = 1.0;
  return pi;
}

StructuralModel structural_coefficients(const Eigen::MatrixXd& sigma_eps, const Cpdag& dag) {
  const Index k = dag.size();
  if (sigma_eps.rows() != k || sigma_eps.cols() != k)
    throw InputError("innovation covariance does not match graph size");
  const auto parents = parent_sets(dag);
  StructuralModel m;
  m.names = dag.nodes();
  m.order = topological_order(dag);
  m.pi = permutation_matrix(m.order);
  m.delta = Eigen::MatrixXd::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    const auto& v = parents[static_cast<std::size_t>(i)];
    if (v.empty()) continue;
    const Eigen::MatrixXd svv = select(sigma_eps, v, v);
    const Eigen::MatrixXd svi = select(sigma_eps, v, {i});
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(svv);
    if (!(lu.rcond() > 1e-14)) throw NumericalError("degenerate parent covariance");
    const Eigen::VectorXd coef = lu.solve(svi);
    for (std::size_t q = 0; q < v.size(); ++q) m.delta(i, v[q]) = coef(static_cast<Index>(q));
  }
  m.d = m.pi * m.delta * m.pi.transpose();
  const Eigen::MatrixXd i_minus_d = Eigen::MatrixXd::Identity(k, k) - m.d;
  // I - D is unit lower triangular, so its inverse is too.
  m.h = i_minus_d.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xi = i_minus_d * m.pi * sigma_eps * m.pi.transpose() * i_minus_d.transpose();
  m.sigma_xi = xi.diagonal().asDiagonal();
  Eigen::MatrixXd off = xi;
  off.diagonal().setZero();
  m.xi_offdiag_residual = k > 0 ? off.cwiseAbs().maxCoeff() : 0.0;
  return m;
}

Eigen::MatrixXd innovation_covariance(const StructuralModel& model) {
  return model.pi.transpose() * model.h * model.sigma_xi * model.h.transpose() * model.pi;
}

std::vector<Eigen::MatrixXd> ma_sequence(const StructuralModel& model, int max_horizon) {
  if (max_horizon < 0) throw InputError("horizon must be nonnegative");
  const Index k = model.size();
  const Eigen::MatrixXd impact = model.pi.transpose() * model.h;
  std::vector<Eigen::MatrixXd> out;
  out.push_back(impact);
  if (model.a.size() == 0) {
    for (int s = 1; s <= max_horizon; ++s) out.push_back(Eigen::MatrixXd::Zero(k, k));
    return out;
  }
  const Eigen::MatrixXd c = companion(model.a);
  // Top-left K x K block of C^s, accumulated as C^s restricted to the first K columns.
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(c.rows(), k);
  for (int s = 1; s <= max_horizon; ++s) {
    power = c * power;
    out.push_back(power.topRows(k) * impact);
  }
  return out;
}

Eigen::MatrixXd ma_coefficients(const StructuralModel& model, int horizon) {
  return ma_sequence(model, horizon).back();
}

nlohmann::json to_json(const StructuralModel& model) {
  nlohmann::json j;
  j["names"] = model.names;
  std::vector<std::string> order;
  for (Index v : model.order) order.push_back(model.names[static_cast<std::size_t>(v)]);
  j["order"] = order;
  j["pi"] = matrix_to_json(model.pi);
  j["delta"] = matrix_to_json(model.delta);
  j["d"] = matrix_to_json(model.d);
  j["h"] = matrix_to_json(model.h);
  j["sigma_xi"] = matrix_to_json(model.sigma_xi);
  j["a"] = matrix_to_json(model.a);
  j["xi_offdiag_residual"] = model.xi_offdiag_residual;
  return j;
}

StructuralModel structural_model_from_json(const nlohmann::json& j) {
  try {
    StructuralModel m;
    m.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& name : j.at("order")) {
      const auto it = std::find(m.names.begin(), m.names.end(), name.get<std::string>());
      if (it == m.names.end()) throw InputError("structural model order names an unknown variable");
      m.order.push_back(static_cast<Index>(it - m.names.begin()));
    }
    m.pi = matrix_from_json(j.at("pi"));
    m.delta = matrix_from_json(j.at("delta"));
    m.d = matrix_from_json(j.at("d"));
    m.h = matrix_from_json(j.at("h"));
    m.sigma_xi = matrix_from_json(j.at("sigma_xi"));
    m.a = matrix_from_json(j.at("a"));
    m.xi_offdiag_residual = j.at("xi_offdiag_residual").get<double>();
    const auto k = static_cast<Index>(m.names.size());
    if (m.size() != k || m.h.rows() != k || m.pi.rows() != k ||
        (m.a.size() != 0 && (m.a.rows() != k || m.a.cols() % k != 0)))
      throw InputError("structural model dimensions are inconsistent");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed structural model JSON: ") + e.what());
  }
}

}  // namespace gcvar
