#include "gcvar/pc_dag.hpp"

#include "gcvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

namespace gcvar {

namespace {

std::vector<std::string> default_names(Index k) {
  std::vector<std::string> names;
  for (Index i = 0; i < k; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

void add_warning(Cpdag& g, std::string text) {
  auto& w = g.warnings();
  if (std::find(w.begin(), w.end(), text) == w.end()) w.push_back(std::move(text));
}

/// Calls f on each size-l subset of `pool` in lexicographic order until f
/// returns true.
template <class F>
bool for_each_subset(const std::vector<Index>& pool, std::size_t l, F&& f) {
  if (l > pool.size()) return false;
  std::vector<std::size_t> pos(l);
  for (std::size_t q = 0; q < l; ++q) pos[q] = q;
  std::vector<Index> subset(l);
  while (true) {
    for (std::size_t q = 0; q < l; ++q) subset[q] = pool[pos[q]];
    if (f(std::span<const Index>(subset))) return true;
    std::size_t q = l;
    while (q > 0 && pos[q - 1] == pool.size() - l + q - 1) --q;
    if (q == 0) return false;
    ++pos[q - 1];
    for (std::size_t r = q; r < l; ++r) pos[r] = pos[r - 1] + 1;
  }
}

}  // namespace

Cpdag::Cpdag(Index size) : Cpdag(default_names(size)) {}

Cpdag::Cpdag(std::vector<std::string> nodes)
    : nodes_(std::move(nodes)), marks_(nodes_.size() * nodes_.size(), false) {}

EdgeType Cpdag::type(Index i, Index j) const {
  const bool a = mark(i, j);
  const bool b = mark(j, i);
  if (a && b) return EdgeType::undirected;
  if (a) return i < j ? EdgeType::forward : EdgeType::backward;
  if (b) return i < j ? EdgeType::backward : EdgeType::forward;
  return EdgeType::none;
}

void Cpdag::add_undirected(Index i, Index j) {
  if (i == j) throw InputError("self-loop requested");
  set_mark(i, j, true);
  set_mark(j, i, true);
}

void Cpdag::orient(Index from, Index to) {
  if (!adjacent(from, to)) throw InputError("cannot orient a missing edge");
  set_mark(from, to, true);
  set_mark(to, from, false);
}

void Cpdag::remove(Index i, Index j) {
  set_mark(i, j, false);
  set_mark(j, i, false);
}

std::vector<Index> Cpdag::neighbours(Index i) const {
  std::vector<Index> out;
  for (Index j = 0; j < size(); ++j)
    if (j != i && adjacent(i, j)) out.push_back(j);
  return out;
}

std::vector<Index> Cpdag::parents(Index i) const {
  std::vector<Index> out;
  for (Index j = 0; j < size(); ++j)
    if (directed(j, i)) out.push_back(j);
  return out;
}

std::vector<Edge> Cpdag::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < size(); ++i) {
    for (Index j = i + 1; j < size(); ++j) {
      switch (type(i, j)) {
        case EdgeType::undirected: out.push_back({i, j, false}); break;
        case EdgeType::forward: out.push_back({i, j, true}); break;
        case EdgeType::backward: out.push_back({j, i, true}); break;
        case EdgeType::none: break;
      }
    }
  }
  return out;
}

std::size_t Cpdag::edge_count() const { return edges().size(); }

bool Cpdag::fully_directed() const {
  for (Index i = 0; i < size(); ++i)
    for (Index j = i + 1; j < size(); ++j)
      if (undirected(i, j)) return false;
  return true;
}

bool Cpdag::acyclic() const {
  const Index k = size();
  std::vector<int> indegree(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (directed(i, j)) ++indegree[static_cast<std::size_t>(j)];
  std::deque<Index> ready;
  for (Index i = 0; i < k; ++i)
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  Index seen = 0;
  while (!ready.empty()) {
    const Index v = ready.front();
    ready.pop_front();
    ++seen;
    for (Index j = 0; j < k; ++j)
      if (directed(v, j) && --indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
  }
  return seen == k;
}

bool Cpdag::has_directed_path(Index from, Index to) const {
  std::vector<bool> visited(static_cast<std::size_t>(size()), false);
  std::deque<Index> todo{from};
  visited[static_cast<std::size_t>(from)] = true;
  while (!todo.empty()) {
    const Index v = todo.front();
    todo.pop_front();
    for (Index j = 0; j < size(); ++j) {
      if (!directed(v, j) || visited[static_cast<std::size_t>(j)]) continue;
      if (j == to) return true;
      visited[static_cast<std::size_t>(j)] = true;
      todo.push_back(j);
    }
  }
  return false;
}

void Cpdag::set_sepset(Index i, Index j, std::vector<Index> set) {
  sepsets_[{std::min(i, j), std::max(i, j)}] = std::move(set);
}

const std::vector<Index>* Cpdag::sepset(Index i, Index j) const {
  const auto it = sepsets_.find({std::min(i, j), std::max(i, j)});
  return it == sepsets_.end() ? nullptr : &it->second;
}

bool Cpdag::operator==(const Cpdag& other) const {
  return size() == other.size() && marks_ == other.marks_;
}

double partial_correlation(const Eigen::MatrixXd& sigma, Index i, Index j,
                           std::span<const Index> cond) {
  if (i == j) throw InputError("partial correlation of a node with itself");
  std::vector<Index> idx{i, j};
  for (Index c : cond) {
    if (c == i || c == j) throw InputError("conditioning set contains a tested node");
    idx.push_back(c);
  }
  const Eigen::MatrixXd sub = select(sigma, idx, idx);
  if (cond.empty()) {
    const double den = std::sqrt(sub(0, 0) * sub(1, 1));
    if (!(den > 0.0)) throw NumericalError("degenerate conditioning set");
    return sub(0, 1) / den;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sub);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("degenerate conditioning set");
  const Eigen::MatrixXd p = lu.inverse();
  const double den = std::sqrt(p(0, 0) * p(1, 1));
  if (!(den > 0.0)) throw NumericalError("degenerate conditioning set");
  return -p(0, 1) / den;
}

double fisher_z(double x) { return 0.5 * std::log((1.0 + x) / (1.0 - x)); }

CiDecision fisher_z_decision(double xi, long n, Index cond_size, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  const double dof = static_cast<double>(n) - static_cast<double>(cond_size) - 3.0;
  if (dof <= 0.0) throw InputError("sample too small for conditioning size");
  if (!(std::abs(xi) < 1.0)) return CiDecision::keep;
  const double stat = std::sqrt(dof) * std::abs(fisher_z(xi));
  return stat <= normal_quantile(1.0 - alpha / 2.0) ? CiDecision::remove : CiDecision::keep;
}

Cpdag pc_skeleton(const Eigen::MatrixXd& sigma_eps, long n, const PcConfig& config,
                  std::vector<std::string> names) {
  const Index k = sigma_eps.rows();
  if (sigma_eps.cols() != k) throw InputError("innovation covariance must be square");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (names.empty()) names = default_names(k);
  if (static_cast<Index>(names.size()) != k) throw InputError("node names do not match dimension");
  if (config.fixed_gaps && (config.fixed_gaps->rows() != k || config.fixed_gaps->cols() != k))
    throw InputError("fixed gaps do not match dimension");

  Cpdag g(std::move(names));
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      if (config.fixed_gaps && ((*config.fixed_gaps)(i, j) || (*config.fixed_gaps)(j, i)))
        g.set_sepset(i, j, {});
      else
        g.add_undirected(i, j);
    }
  }

  const int cap = config.max_cond_size.value_or(k <= 30 ? static_cast<int>(k) : 8);
  for (int l = 0; l <= cap; ++l) {
    bool any_testable = false;
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < k; ++j) {
        if (i == j || !g.adjacent(i, j)) continue;
        std::vector<Index> pool = g.neighbours(i);
        pool.erase(std::remove(pool.begin(), pool.end(), j), pool.end());
        if (pool.size() < static_cast<std::size_t>(l)) continue;
        any_testable = true;
        for_each_subset(pool, static_cast<std::size_t>(l), [&](std::span<const Index> s) {
          const double xi = partial_correlation(sigma_eps, i, j, s);
          if (fisher_z_decision(xi, n, l, config.alpha) == CiDecision::keep) return false;
          g.remove(i, j);
          g.set_sepset(i, j, std::vector<Index>(s.begin(), s.end()));
          return true;
        });
      }
    }
    if (!any_testable) break;
  }
  return g;
}

namespace {

bool try_orient(Cpdag& g, Index from, Index to) {
  if (g.has_directed_path(to, from)) {
    add_warning(g, "orienting " + g.nodes()[static_cast<std::size_t>(from)] + " -> " +
                       g.nodes()[static_cast<std::size_t>(to)] +
                       " would create a cycle; edge left undirected");
    return false;
  }
  g.orient(from, to);
  return true;
}

bool in_sepset(const Cpdag& g, Index i, Index j, Index k) {
  const auto* s = g.sepset(i, j);
  return s != nullptr && std::find(s->begin(), s->end(), k) != s->end();
}

}  // namespace

Cpdag orient_edges(Cpdag g) {
  const Index k = g.size();
  // Collider proposals are gathered first so that the result does not depend
  // on which triple is visited first.
  std::vector<std::vector<int>> proposal(static_cast<std::size_t>(k),
                                         std::vector<int>(static_cast<std::size_t>(k), 0));
  for (Index c = 0; c < k; ++c) {
    const auto nb = g.neighbours(c);
    for (std::size_t p = 0; p < nb.size(); ++p) {
      for (std::size_t q = p + 1; q < nb.size(); ++q) {
        const Index i = nb[p];
        const Index j = nb[q];
        if (g.adjacent(i, j) || in_sepset(g, i, j, c)) continue;
        proposal[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = 1;
        proposal[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] = 1;
      }
    }
  }
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      if (!proposal[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
      if (proposal[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        if (i < j)
          add_warning(g, "conflicting collider orientation on " +
                             g.nodes()[static_cast<std::size_t>(i)] + " - " +
                             g.nodes()[static_cast<std::size_t>(j)] + "; edge left undirected");
        continue;
      }
      if (g.undirected(i, j)) try_orient(g, i, j);
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (Index x = 0; x < k; ++x) {
      for (Index y = 0; y < k; ++y) {
        if (x == y || !g.undirected(x, y)) continue;
        bool orient = false;
        for (Index z = 0; z < k && !orient; ++z) {
          if (z == x || z == y) continue;
          // R1: z -> x - y, z and y not adjacent.
          if (g.directed(z, x) && !g.adjacent(z, y)) orient = true;
          // R2: x -> z -> y.
          if (g.directed(x, z) && g.directed(z, y)) orient = true;
        }
        // R3: x - c -> y, x - d -> y, c and d not adjacent.
        for (Index c = 0; c < k && !orient; ++c) {
          if (c == x || c == y || !g.undirected(x, c) || !g.directed(c, y)) continue;
          for (Index d = c + 1; d < k && !orient; ++d) {
            if (d == x || d == y || !g.undirected(x, d) || !g.directed(d, y)) continue;
            if (!g.adjacent(c, d)) orient = true;
          }
        }
        if (orient && try_orient(g, x, y)) changed = true;
      }
    }
  }
  return g;
}

Cpdag pc_algorithm(const Eigen::MatrixXd& sigma_eps, long n, const PcConfig& config,
                   std::vector<std::string> names) {
  return orient_edges(pc_skeleton(sigma_eps, n, config, std::move(names)));
}

BoolMatrix fixed_gaps_from_precision(const Eigen::MatrixXd& theta11, double tol) {
  const Index k = theta11.rows();
  BoolMatrix gaps = BoolMatrix::Constant(k, k, false);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (i != j && std::abs(theta11(i, j)) <= tol && std::abs(theta11(j, i)) <= tol)
        gaps(i, j) = true;
  return gaps;
}

std::string to_dot(const Cpdag& graph) {
  std::ostringstream out;
  out << "digraph cpdag {\n";
  for (const auto& name : graph.nodes()) out << "  \"" << name << "\";\n";
  for (const auto& e : graph.edges()) {
    out << "  \"" << graph.nodes()[static_cast<std::size_t>(e.from)] << "\" -> \""
        << graph.nodes()[static_cast<std::size_t>(e.to)] << "\"";
    if (!e.directed) out << " [dir=none]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

nlohmann::json to_json(const Cpdag& graph) {
  nlohmann::json j;
  j["nodes"] = graph.nodes();
  j["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges())
    j["edges"].push_back({{"from", graph.nodes()[static_cast<std::size_t>(e.from)]},
                          {"to", graph.nodes()[static_cast<std::size_t>(e.to)]},
                          {"directed", e.directed}});
  j["sepsets"] = nlohmann::json::array();
  for (const auto& [pair, set] : graph.sepsets()) {
    std::vector<std::string> members;
    for (Index v : set) members.push_back(graph.nodes()[static_cast<std::size_t>(v)]);
    j["sepsets"].push_back({{"pair",
                             {graph.nodes()[static_cast<std::size_t>(pair.first)],
                              graph.nodes()[static_cast<std::size_t>(pair.second)]}},
                            {"set", members}});
  }
  j["fully_directed"] = graph.fully_directed();
  j["warnings"] = graph.warnings();
  return j;
}

Cpdag cpdag_from_json(const nlohmann::json& j) {
  try {
    Cpdag g(j.at("nodes").get<std::vector<std::string>>());
    auto index_of = [&](const std::string& name) {
      const auto it = std::find(g.nodes().begin(), g.nodes().end(), name);
      if (it == g.nodes().end()) throw InputError("graph refers to unknown node " + name);
      return static_cast<Index>(it - g.nodes().begin());
    };
    for (const auto& e : j.at("edges")) {
      const Index from = index_of(e.at("from").get<std::string>());
      const Index to = index_of(e.at("to").get<std::string>());
      g.add_undirected(from, to);
      if (e.at("directed").get<bool>()) g.orient(from, to);
    }
    if (j.contains("sepsets")) {
      for (const auto& s : j.at("sepsets")) {
        std::vector<Index> members;
        for (const auto& m : s.at("set")) members.push_back(index_of(m.get<std::string>()));
        g.set_sepset(index_of(s.at("pair").at(0).get<std::string>()),
                     index_of(s.at("pair").at(1).get<std::string>()), std::move(members));
      }
    }
    if (j.contains("warnings")) g.warnings() = j.at("warnings").get<std::vector<std::string>>();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace gcvar
