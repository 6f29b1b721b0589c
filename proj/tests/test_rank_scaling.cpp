#include "gcvar/errors.hpp"
#include "gcvar/io.hpp"
#include "gcvar/rank_scaling.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gcvar;

namespace {

Panel random_panel(Index n, Index k, std::uint64_t seed) {
  Eigen::MatrixXd v = testing::gaussian_matrix(n, k, seed);
  // Mild serial dependence so that the lag blocks are not empty.
  for (Index t = 1; t < n; ++t) v.row(t) += 0.5 * v.row(t - 1);
  return make_panel(std::move(v));
}

}  // namespace

TEST_CASE("stack_lags") {
  SUBCASE("3x1 series with one lag") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::MatrixXd expected(2, 2);
    expected << 2, 1, 3, 2;
    CHECK(stack_lags(x, 1) == expected);
  }
  SUBCASE("zero lags is the identity map") {
    const Eigen::MatrixXd x = testing::gaussian_matrix(6, 3, 1);
    CHECK(stack_lags(x, 0) == x);
  }
  SUBCASE("5x2 series with two lags, by index") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50;
    const Eigen::MatrixXd w = stack_lags(x, 2);
    REQUIRE(w.rows() == 3);
    REQUIRE(w.cols() == 6);
    for (Index r = 0; r < 3; ++r)
      for (Index l = 0; l <= 2; ++l)
        for (Index k = 0; k < 2; ++k) CHECK(w(r, l * 2 + k) == x(r + 2 - l, k));
  }
}

TEST_CASE("build_lagged requires four stacked rows") {
  const Panel p = random_panel(8, 2, 3);
  CHECK(build_lagged(p, 4).values.rows() == 4);
  CHECK_THROWS_WITH_AS(build_lagged(p, 5), "insufficient sample for lag order", InputError);
  const LaggedDesign d = build_lagged(p, 2);
  CHECK(d.block_size == 2);
  CHECK(d.names == std::vector<std::string>{"X1_l0", "X2_l0", "X1_l1", "X2_l1", "X1_l2", "X2_l2"});
}

TEST_CASE("build_lagged_segments never stacks across a range boundary") {
  Eigen::MatrixXd v(10, 2);
  for (Index t = 0; t < 10; ++t) v.row(t) << t, 100 + t * t;
  const Panel p = make_panel(v);
  const LaggedDesign d = build_lagged_segments(p, {{0, 4}, {6, 10}}, 1);
  REQUIRE(d.values.rows() == 6);
  for (Index r = 0; r < d.values.rows(); ++r) CHECK(d.values(r, 0) - d.values(r, 2) == 1.0);
  CHECK(d.values(3, 0) == 7.0);
}

TEST_CASE("mid_ranks averages ties") {
  const std::vector<double> x{3.0, 1.0, 3.0, 2.0, 3.0};
  CHECK(mid_ranks(x) == std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0});
}

TEST_CASE("spearman_rho") {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  CHECK(spearman_rho(a, a) == 1.0);
  CHECK(spearman_rho(a, b) == -1.0);
  const std::vector<double> x{1, 2, 3, 4}, y{2, 1, 4, 3};
  CHECK(spearman_rho(x, y) == doctest::Approx(0.6).epsilon(1e-15));

  // Reference value from an independent rank-correlation routine.
  const std::vector<double> u{0.3, 1.2, -0.7, 2.2, 0.9, -1.5, 0.1}, v{1.0, 0.2, -0.3, 1.7, 1.1, -0.8, -0.1};
  CHECK(spearman_rho(u, v) == doctest::Approx(0.8928571428571429).epsilon(1e-14));

  const std::vector<double> tied{1, 1, 2, 3}, plain{1, 2, 3, 4};
  CHECK(spearman_rho(tied, plain) == doctest::Approx(0.9).epsilon(1e-15));

  const std::vector<double> flat{2, 2, 2, 2};
  CHECK_THROWS_WITH_AS(spearman_rho(flat, plain), "zero rank variance", NumericalError);
}

TEST_CASE("rho_to_correlation") {
  CHECK(rho_to_correlation(0.0) == 0.0);
  CHECK(rho_to_correlation(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rho_to_correlation(-1.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(rho_to_correlation(0.6) == doctest::Approx(0.618034).epsilon(1e-6));
  double prev = rho_to_correlation(-1.0);
  for (int i = -999; i <= 1000; ++i) {
    const double r = rho_to_correlation(i / 1000.0);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("scaling_matrix structure") {
  const Panel p = random_panel(300, 3, 7);
  for (int lags : {1, 2}) {
    const ScalingMatrix s = scaling_matrix(build_lagged(p, lags));
    const Index k = 3;
    REQUIRE(s.dim() == (lags + 1) * k);
    CHECK(s.sigma == s.sigma.transpose());
    CHECK(s.sigma.diagonal() == Eigen::VectorXd::Ones(s.dim()));
    CHECK(s.sigma.cwiseAbs().maxCoeff() <= 1.0);
    for (int a = 0; a <= lags; ++a)
      for (int b = 0; b <= lags; ++b) {
        const int d = b - a;
        const Eigen::MatrixXd ref = d >= 0 ? Eigen::MatrixXd(s.sigma.block(0, d * k, k, k))
                                           : Eigen::MatrixXd(s.sigma.block(0, -d * k, k, k).transpose());
        CHECK(s.sigma.block(a * k, b * k, k, k) == ref);
      }
  }
}

TEST_CASE("scaling_matrix with identical and reversed columns") {
  Eigen::MatrixXd v(40, 2);
  for (Index t = 0; t < 40; ++t) v.row(t) << std::sin(0.7 * t), std::sin(0.7 * t);
  const ScalingMatrix same = scaling_matrix(build_lagged(make_panel(v), 1));
  CHECK(same.sigma(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  v.col(1) = -v.col(0);
  const ScalingMatrix opposite = scaling_matrix(build_lagged(make_panel(v), 1));
  CHECK(opposite.sigma(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("scaling_matrix is invariant under increasing transforms") {
  const Panel p = random_panel(200, 3, 5);
  Panel q = p;
  q.values.col(0) = p.values.col(0).array().exp();
  q.values.col(1) = p.values.col(1).array().cube() + 2.0;
  q.values.col(2) = 3.0 * p.values.col(2).array() - 1.0;
  CHECK(scaling_matrix(build_lagged(p, 1)).sigma == scaling_matrix(build_lagged(q, 1)).sigma);
}

TEST_CASE("average_blocks restores block Toeplitz structure") {
  const Eigen::MatrixXd m = testing::random_correlation(6, 9);
  const Eigen::MatrixXd avg = average_blocks(m, 2);
  CHECK(avg.block(0, 0, 2, 2) == avg.block(2, 2, 2, 2));
  CHECK(avg.block(2, 2, 2, 2) == avg.block(4, 4, 2, 2));
  CHECK(avg.block(0, 2, 2, 2) == avg.block(2, 4, 2, 2));
  CHECK(avg.block(2, 0, 2, 2) == avg.block(0, 2, 2, 2).transpose());
  const Eigen::MatrixXd expected_diag = (m.block(0, 0, 2, 2) + m.block(2, 2, 2, 2) + m.block(4, 4, 2, 2)) / 3.0;
  CHECK((avg.block(0, 0, 2, 2) - symmetrized(expected_diag)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(average_blocks(avg, 2) == avg);
}

TEST_CASE("psd_repair") {
  SUBCASE("identity is unchanged") {
    CHECK(psd_repair(Eigen::MatrixXd::Identity(4, 4)) == Eigen::MatrixXd::Identity(4, 4));
  }
  SUBCASE("a slightly indefinite 2x2 matrix is repaired") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 1.0001, 1.0001, 1;
    const Eigen::MatrixXd r = psd_repair(m, 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    CHECK(es.eigenvalues().minCoeff() >= 1e-6);
    CHECK((r.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(r == r.transpose());
  }
  SUBCASE("valid correlation matrices are untouched and repair is idempotent") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Eigen::MatrixXd c = testing::random_correlation(5, seed);
      CHECK((psd_repair(c) - c).cwiseAbs().maxCoeff() <= 1e-12);
      Eigen::MatrixXd bad = c;
      bad(0, 1) = bad(1, 0) = 0.99;
      bad(0, 2) = bad(2, 0) = -0.99;
      bad(1, 2) = bad(2, 1) = 0.99;
      const Eigen::MatrixXd once = psd_repair(bad);
      CHECK(psd_repair(once) == once);
    }
  }
  SUBCASE("nonpositive floor is rejected") {
    CHECK_THROWS_AS(psd_repair(Eigen::MatrixXd::Identity(2, 2), 0.0), InputError);
  }
}

TEST_CASE("panel validation") {
  Eigen::MatrixXd v = testing::gaussian_matrix(5, 2, 2);
  CHECK_NOTHROW(make_panel(v));
  CHECK_THROWS_AS(make_panel(v.topRows(3)), InputError);
  CHECK_THROWS_AS(make_panel(v.leftCols(1)), InputError);
  Eigen::MatrixXd flat = v;
  flat.col(1).setConstant(2.0);
  CHECK_THROWS_AS(make_panel(flat), InputError);
  Eigen::MatrixXd hole = v;
  hole(2, 0) = std::nan("");
  CHECK_THROWS_AS(make_panel(hole), InputError);
  CHECK_THROWS_AS(make_panel(v, {"a", "a"}), InputError);
  CHECK_THROWS_AS(make_panel(v, {"a"}), InputError);
}

TEST_CASE("difference_columns") {
  Eigen::MatrixXd v(5, 2);
  v << 1, 5, 3, 4, 6, 9, 10, 2, 15, 8;
  const Panel p = make_panel(v, {"x", "y"});
  const Panel d = difference_columns(p, {"x"});
  REQUIRE(d.rows() == 4);
  CHECK(d.values.col(0) == Eigen::Vector4d(2, 3, 4, 5));
  CHECK(d.values.col(1) == Eigen::Vector4d(4, 9, 2, 8));
  CHECK(difference_columns(p, {}).values == p.values);
  CHECK_THROWS_AS(difference_columns(p, {"z"}), InputError);
}

TEST_CASE("panel CSV") {
  testing::TempDir dir("csv");
  SUBCASE("round trip is exact") {
    const Panel p = make_panel(testing::gaussian_matrix(6, 3, 4), {"a", "b c", "d"});
    write_panel_csv(p, dir.path() / "p.csv");
    const Panel q = read_panel_csv(dir.path() / "p.csv");
    CHECK(q.names == p.names);
    CHECK(q.values == p.values);
  }
  SUBCASE("byte order mark, quoted header and CRLF") {
    write_text(dir.path() / "q.csv", "\xEF\xBB\xBF\"u\",\"v, w\"\r\n1,2\r\n2,1\r\n3,5\r\n4,0.5\r\n");
    const Panel q = read_panel_csv(dir.path() / "q.csv");
    CHECK(q.names == std::vector<std::string>{"u", "v, w"});
    CHECK(q.values(3, 1) == 0.5);
  }
  SUBCASE("missing value") {
    write_text(dir.path() / "m.csv", "u,v\n1,2\n2,\n3,5\n4,1\n");
    CHECK_THROWS_AS(read_panel_csv(dir.path() / "m.csv"), InputError);
  }
  SUBCASE("non-numeric value") {
    write_text(dir.path() / "n.csv", "u,v\n1,2\n2,1e\n3,5\n4,1\n");
    CHECK_THROWS_AS(read_panel_csv(dir.path() / "n.csv"), InputError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_panel_csv(dir.path() / "absent.csv"), InputError); }
}
