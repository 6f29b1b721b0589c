#include "gcvar/errors.hpp"
#include "gcvar/pc_dag.hpp"
#include "gcvar/sim_harness.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace gcvar;

namespace {

Eigen::MatrixXd v_structure_covariance() {
  const Eigen::MatrixXd h = structure_h(Structure::v_structure);
  return h * h.transpose();
}

Cpdag skeleton_of(Index size, std::initializer_list<std::pair<Index, Index>> edges) {
  Cpdag g(size);
  for (auto [i, j] : edges) g.add_undirected(i, j);
  return g;
}

}  // namespace

TEST_CASE("partial_correlation") {
  const std::vector<Index> none;
  SUBCASE("empty conditioning set is the marginal correlation") {
    const Eigen::MatrixXd s = testing::random_correlation(4, 2) * 3.0;
    CHECK(partial_correlation(s, 0, 2, none) == doctest::Approx(s(0, 2) / std::sqrt(s(0, 0) * s(2, 2))));
  }
  SUBCASE("identity") {
    const std::vector<Index> cond{2, 3};
    CHECK(partial_correlation(Eigen::MatrixXd::Identity(4, 4), 0, 1, cond) == 0.0);
  }
  SUBCASE("v-structure covariance") {
    const Eigen::MatrixXd s = v_structure_covariance();
    const std::vector<Index> given3{2}, given2{1};
    CHECK(partial_correlation(s, 0, 1, none) == 0.0);
    CHECK(partial_correlation(s, 0, 1, given3) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(partial_correlation(s, 0, 2, given2) == doctest::Approx(0.7071067811865475).epsilon(1e-14));
  }
  SUBCASE("degenerate conditioning set") {
    const std::vector<Index> cond{1};
    CHECK_THROWS_AS(partial_correlation(Eigen::MatrixXd::Ones(3, 3), 0, 2, cond), NumericalError);
  }
}

TEST_CASE("fisher_z and the test decision") {
  CHECK(fisher_z(0.5) == doctest::Approx(0.549306).epsilon(1e-6));
  CHECK(fisher_z(0.0) == 0.0);
  CHECK(fisher_z_decision(0.0, 1000, 0, 0.999) == CiDecision::remove);
  // sqrt(96) * g(0.1) = 0.983 < 1.95996.
  CHECK(fisher_z_decision(0.1, 100, 1, 0.05) == CiDecision::remove);
  CHECK(fisher_z_decision(0.3, 100, 1, 0.05) == CiDecision::keep);
  CHECK(fisher_z_decision(1.0, 100, 1, 0.05) == CiDecision::keep);
  CHECK_THROWS_AS(fisher_z_decision(0.1, 5, 2, 0.05), InputError);
}

TEST_CASE("pc_skeleton") {
  SUBCASE("independent innovations give no edges") {
    PcConfig c;
    c.alpha = 0.05;
    CHECK(pc_skeleton(Eigen::MatrixXd::Identity(5, 5), 1000, c).edge_count() == 0);
  }
  SUBCASE("population v-structure") {
    PcConfig c;
    c.alpha = 1.0 - 1e-13;
    const Cpdag g = pc_skeleton(v_structure_covariance(), 1000000, c);
    CHECK(g.edge_count() == 2);
    CHECK(g.adjacent(0, 2));
    CHECK(g.adjacent(1, 2));
    REQUIRE(g.sepset(0, 1) != nullptr);
    CHECK(g.sepset(0, 1)->empty());
  }
  SUBCASE("fixed gaps are removed without a test") {
    PcConfig c;
    c.alpha = 0.01;
    BoolMatrix gaps = BoolMatrix::Constant(3, 3, false);
    gaps(0, 2) = gaps(2, 0) = true;
    const Cpdag g = pc_skeleton(v_structure_covariance(), 100000, c);
    c.fixed_gaps = gaps;
    const Cpdag r = pc_skeleton(v_structure_covariance(), 100000, c);
    CHECK_FALSE(r.adjacent(0, 2));
    REQUIRE(r.sepset(0, 2) != nullptr);
    CHECK(r.sepset(0, 2)->empty());
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        if (r.adjacent(i, j)) CHECK(g.adjacent(i, j));
  }
}

TEST_CASE("orient_edges") {
  SUBCASE("chain stays undirected") {
    Cpdag g = skeleton_of(3, {{0, 1}, {1, 2}});
    g.set_sepset(0, 2, {1});
    const Cpdag o = orient_edges(g);
    CHECK(o.undirected(0, 1));
    CHECK(o.undirected(1, 2));
  }
  SUBCASE("collider is oriented") {
    Cpdag g = skeleton_of(3, {{0, 2}, {1, 2}});
    g.set_sepset(0, 1, {});
    const Cpdag o = orient_edges(g);
    CHECK(o.directed(0, 2));
    CHECK(o.directed(1, 2));
    CHECK(o.fully_directed());
  }
  SUBCASE("Meek rule 1 propagates below a collider") {
    Cpdag g = skeleton_of(4, {{0, 2}, {1, 2}, {2, 3}});
    g.set_sepset(0, 1, {});
    g.set_sepset(0, 3, {2});
    g.set_sepset(1, 3, {2});
    const Cpdag o = orient_edges(g);
    CHECK(o.directed(2, 3));
  }
  SUBCASE("Meek rule 2 avoids a cycle") {
    // a -> b -> c and a - c: orient a -> c.
    Cpdag g = skeleton_of(3, {{0, 1}, {1, 2}, {0, 2}});
    g.orient(0, 1);
    g.orient(1, 2);
    const Cpdag o = orient_edges(g);
    CHECK(o.directed(0, 2));
  }
  SUBCASE("Meek rule 3") {
    // c - a, c - b, c - d, a -> d <- b, a and b not adjacent: orient c -> d.
    Cpdag g = skeleton_of(4, {{2, 0}, {2, 1}, {2, 3}, {0, 3}, {1, 3}});
    g.set_sepset(0, 1, {2});
    g.orient(0, 3);
    g.orient(1, 3);
    const Cpdag o = orient_edges(g);
    CHECK(o.directed(2, 3));
    CHECK(o.undirected(0, 2));
  }
  SUBCASE("conflicting colliders leave a warning and an acyclic graph") {
    // 0 - 1 - 2 - 3 with empty sepsets everywhere proposes 0->1<-2 and 1->2<-3.
    Cpdag g = skeleton_of(4, {{0, 1}, {1, 2}, {2, 3}});
    g.set_sepset(0, 2, {});
    g.set_sepset(1, 3, {});
    g.set_sepset(0, 3, {});
    const Cpdag o = orient_edges(g);
    CHECK_FALSE(o.warnings().empty());
    CHECK(o.acyclic());
  }
  SUBCASE("oriented output is acyclic on random skeletons") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Eigen::MatrixXd s = testing::random_correlation(7, seed, 0.1);
      PcConfig c;
      c.alpha = 0.2;
      const Cpdag o = pc_algorithm(s, 200, c);
      CHECK(o.acyclic());
    }
  }
}

TEST_CASE("population classes of the benchmark structures") {
  PcConfig c;
  c.alpha = 1.0 - 1e-13;
  const auto run = [&](Structure s) {
    const Eigen::MatrixXd h = structure_h(s);
    return pc_algorithm(h * h.transpose(), 1000000, c);
  };
  const Cpdag chain = run(Structure::chain);
  CHECK(chain.edge_count() == 2);
  CHECK(chain.undirected(0, 1));
  CHECK(chain.undirected(1, 2));
  CHECK(run(Structure::common_cause) == chain);
  const Cpdag diamond = run(Structure::diamond1);
  CHECK(diamond.directed(0, 2));
  CHECK(diamond.directed(1, 2));
  CHECK(diamond.directed(0, 3));
  CHECK(diamond.directed(1, 3));
  CHECK(diamond.edge_count() == 4);
}

TEST_CASE("fixed_gaps_from_precision") {
  Eigen::MatrixXd t(3, 3);
  t << 2, 0, 0.5, 0, 1, 1e-9, 0.5, 1e-9, 3;
  const BoolMatrix g = fixed_gaps_from_precision(t);
  CHECK(g(0, 1));
  CHECK_FALSE(g(0, 2));
  CHECK_FALSE(g(1, 2));
  CHECK_FALSE(g(0, 0));
  CHECK(fixed_gaps_from_precision(t, 1e-6)(1, 2));
}

TEST_CASE("graph exports") {
  Cpdag g(std::vector<std::string>{"x", "y", "z"});
  g.add_undirected(0, 2);
  g.add_undirected(1, 2);
  g.orient(0, 2);
  g.set_sepset(0, 1, {});
  const std::string dot = to_dot(g);
  CHECK(dot.find("\"x\" -> \"z\";") != std::string::npos);
  CHECK(dot.find("\"y\" -> \"z\" [dir=none];") != std::string::npos);
  const nlohmann::json j = to_json(g);
  CHECK(j["nodes"] == nlohmann::json::array({"x", "y", "z"}));
  CHECK(j["fully_directed"] == false);
  const Cpdag back = cpdag_from_json(j);
  CHECK(back == g);
  REQUIRE(back.sepset(0, 1) != nullptr);
}
