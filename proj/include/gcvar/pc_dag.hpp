#pragma once

#include "gcvar/linalg.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gcvar {

enum class EdgeType { none, undirected, forward, backward };

struct Edge {
  Index from = 0;
  Index to = 0;
  bool directed = false;
};

/// Mixed graph over K nodes. An edge i-j is stored as two marks; a directed
/// edge i->j keeps only the mark (i, j).
class Cpdag {
 public:
  Cpdag() = default;
  explicit Cpdag(Index size);
  explicit Cpdag(std::vector<std::string> nodes);

  Index size() const { return static_cast<Index>(nodes_.size()); }
  const std::vector<std::string>& nodes() const { return nodes_; }

  bool adjacent(Index i, Index j) const { return mark(i, j) || mark(j, i); }
  bool directed(Index from, Index to) const { return mark(from, to) && !mark(to, from); }
  bool undirected(Index i, Index j) const { return mark(i, j) && mark(j, i); }

  /// Edge type of the unordered pair, seen from i < j: forward means i->j.
  EdgeType type(Index i, Index j) const;

  void add_undirected(Index i, Index j);
  void orient(Index from, Index to);
  void remove(Index i, Index j);

  std::vector<Index> neighbours(Index i) const;
  std::vector<Index> parents(Index i) const;

  /// Undirected edges as (i < j); directed edges as (from, to); pairs in
  /// lexicographic order.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  bool fully_directed() const;
  /// True when the directed part has no cycle.
  bool acyclic() const;
  /// True when a directed path from -> ... -> to exists.
  bool has_directed_path(Index from, Index to) const;

  void set_sepset(Index i, Index j, std::vector<Index> set);
  const std::vector<Index>* sepset(Index i, Index j) const;
  const std::map<std::pair<Index, Index>, std::vector<Index>>& sepsets() const { return sepsets_; }

  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool operator==(const Cpdag& other) const;

 private:
  bool mark(Index i, Index j) const { return marks_[static_cast<std::size_t>(i * size() + j)]; }
  void set_mark(Index i, Index j, bool v) { marks_[static_cast<std::size_t>(i * size() + j)] = v; }

  std::vector<std::string> nodes_;
  std::vector<bool> marks_;
  std::map<std::pair<Index, Index>, std::vector<Index>> sepsets_;
  std::vector<std::string> warnings_;
};

struct PcConfig {
  double alpha = 0.01;
  std::optional<int> max_cond_size;  // unset: unlimited for K <= 30, else 8
  std::optional<BoolMatrix> fixed_gaps;
};

/// -P_ij / sqrt(P_ii P_jj), P the inverse of sigma restricted to {i, j} + cond.
/// Throws NumericalError("degenerate conditioning set").
double partial_correlation(const Eigen::MatrixXd& sigma, Index i, Index j,
                           std::span<const Index> cond);

/// g(x) = 0.5 ln((1 + x) / (1 - x)).
double fisher_z(double x);

enum class CiDecision { keep, remove };

/// Remove the edge when sqrt(n - m - 3) |g(xi)| <= Phi^{-1}(1 - alpha / 2).
/// Throws InputError("sample too small for conditioning size") when
/// n - m - 3 <= 0.
CiDecision fisher_z_decision(double xi, long n, Index cond_size, double alpha);

/// Skeleton phase of PC: start complete (minus fixed gaps), test each
/// remaining edge against size-l subsets of current adjacencies for
/// l = 0, 1, ..., delete on the first accepted independence. Pairs and
/// subsets are visited in ascending index order.
Cpdag pc_skeleton(const Eigen::MatrixXd& sigma_eps, long n, const PcConfig& config,
                  std::vector<std::string> names = {});

/// Collider orientation on unshielded triples followed by Meek rules R1-R3.
/// Orientations that would conflict or close a directed cycle leave the edge
/// undirected and add a warning.
Cpdag orient_edges(Cpdag skeleton);

Cpdag pc_algorithm(const Eigen::MatrixXd& sigma_eps, long n, const PcConfig& config,
                   std::vector<std::string> names = {});

/// Gaps for every off-diagonal zero of theta11.
BoolMatrix fixed_gaps_from_precision(const Eigen::MatrixXd& theta11, double tol = 0.0);

std::string to_dot(const Cpdag& graph);
nlohmann::json to_json(const Cpdag& graph);
Cpdag cpdag_from_json(const nlohmann::json& j);

}  // namespace gcvar
