#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "hkelab/graph.hpp"
#include "hkelab/metric_space.hpp"
#include "hkelab/models.hpp"
#include "hkelab/scale.hpp"
#include "hkelab/volume.hpp"

using namespace hkelab;

namespace {

MetricMeasureSpace two_point(double d = 1.0) {
  Eigen::MatrixXd D(2, 2);
  D << 0, d, d, 0;
  return make_space({"x", "y"}, D, {1.0, 1.0});
}

MetricMeasureSpace unit_grid(std::size_t n) {
  // n points on [0, 1], uniform measure 1/n
  Eigen::MatrixXd D(n, n);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j)
      D(i, j) = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(n - 1);
  }
  return make_space(ids, D, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

}  // namespace

TEST_CASE("geodesic distances") {
  SUBCASE("unit square grid") {
    WeightedGraph g({"00", "10", "11", "01"}, {1, 1, 1, 1},
                    {{0, 1, 1, 1}, {1, 2, 1, 1}, {2, 3, 1, 1}, {3, 0, 1, 1}});
    auto s = geodesic_space(g);
    CHECK(s.dist(0, 2) == 2.0);
  }
  SUBCASE("single edge") {
    auto s = geodesic_space(path_graph(2));
    CHECK(s.dist(0, 0) == 0.0);
    CHECK(s.dist(0, 1) == 1.0);
    CHECK(s.dist(1, 0) == 1.0);
  }
  SUBCASE("pre-carpet level 1 corner to corner") {
    Model m = pre_carpet(1, 1);
    auto s = geodesic_space(m.graph);
    const Index a = m.graph.index_of("c0_0"), b = m.graph.index_of("c3_3");
    CHECK(s.dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("disconnected graph is rejected with the offending component") {
    WeightedGraph g({"a", "b", "c"}, {1, 1, 1}, {{0, 1, 1, 1}});
    try {
      geodesic_space(g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
      CHECK(std::string(e.what()).find("c") != std::string::npos);
    }
  }
  SUBCASE("triangle inequality holds on a generated model") {
    auto s = geodesic_space(gasket_cable(2, 2).graph);
    auto tc = check_triangle(s);
    CHECK(tc.ok);
    CHECK(tc.exhaustive);
  }
}

TEST_CASE("graph validation and io") {
  CHECK_THROWS_AS(WeightedGraph({"a", "b"}, {1, 1}, {{0, 0, 1, 1}}), Error);
  CHECK_THROWS_AS(WeightedGraph({"a", "b"}, {1, 1}, {{0, 1, 1, 1}, {1, 0, 1, 1}}), Error);
  CHECK_THROWS_AS(WeightedGraph({"a", "b"}, {1, -1}, {{0, 1, 1, 1}}), Error);

  SUBCASE("negative conductance names the line") {
    std::istringstream in("V a 1\nV b 1\n# comment\nE a b 1 -2\n");
    try {
      read_graph(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("malformed number is a parse error") {
    std::istringstream in("V a one\n");
    CHECK_THROWS_AS(read_graph(in), Error);
  }
  SUBCASE("write then read round trip") {
    Model m = gasket_cable(1, 1);
    std::stringstream io;
    write_graph(io, m.graph);
    WeightedGraph back = read_graph(io);
    CHECK(back.ids() == m.graph.ids());
    CHECK(back.measure() == m.graph.measure());
    REQUIRE(back.edge_count() == m.graph.edge_count());
    for (std::size_t i = 0; i < back.edge_count(); ++i) {
      CHECK(back.edges()[i].a == m.graph.edges()[i].a);
      CHECK(back.edges()[i].b == m.graph.edges()[i].b);
      CHECK(back.edges()[i].length == m.graph.edges()[i].length);
      CHECK(back.edges()[i].conductance == m.graph.edges()[i].conductance);
    }
  }
  SUBCASE("4-cycle file") {
    std::istringstream in("V a 1\nV b 1\nV c 1\nV d 1\nE a b 1 1\nE b c 1 1\nE c d 1 1\nE d a 1 1\n");
    WeightedGraph g = read_graph(in);
    CHECK(g.vertex_count() == 4);
    CHECK(g.edge_count() == 4);
    CHECK(diameter(geodesic_space(g)) == 2.0);
  }
}

TEST_CASE("balls") {
  auto tp = two_point();
  CHECK(ball(tp, 0, 1.0) == PointSet{0});
  CHECK(ball(tp, 0, 1.5) == PointSet{0, 1});
  CHECK(closed_ball(tp, 0, 1.0) == PointSet{0, 1});
  auto path = geodesic_space(path_graph(5));
  CHECK(ball(path, 2, 2.0) == PointSet{1, 2, 3});
  CHECK(mass(path, ball(path, 2, 2.0)) == 3.0);
  SUBCASE("boundary roundoff does not move points across the sphere") {
    // 1/3 + 1/3 + 1/3 is not exactly 1 in binary
    auto s = geodesic_space(path_graph(4, 1.0 / 3.0));
    CHECK(ball(s, 0, 1.0).size() == 3);
    CHECK(closed_ball(s, 0, 1.0).size() == 4);
  }
}

TEST_CASE("epsilon nets") {
  auto path = geodesic_space(path_graph(5));
  PointSet net = epsilon_net(path, 1.5, 0);
  CHECK(net == PointSet{0, 2, 4});
  CHECK(covering_radius(path, net) <= 1.5);
  CHECK(epsilon_net(path, 10.0, 3).size() == 1);
  CHECK_THROWS_AS(epsilon_net(path, 0.0, 0), Error);

  auto gasket = geodesic_space(build_member([] {
    auto s = FractalModelSpec::defaults(ModelFamily::gasket_cable);
    s.level = 2;
    return s;
  }()).graph);
  PointSet gn = epsilon_net(gasket, 0.5, 7);
  CHECK(gn.size() >= 3);
  CHECK(gn.size() <= 15);
  CHECK(covering_radius(gasket, gn) <= 0.5);
  for (std::size_t i = 0; i < gn.size(); ++i)
    for (std::size_t j = i + 1; j < gn.size(); ++j)
      CHECK(gasket.dist(static_cast<Eigen::Index>(gn[i]), static_cast<Eigen::Index>(gn[j])) > 0.5);
}

TEST_CASE("diameters") {
  CHECK(diameter(two_point()) == 1.0);
  auto p = geodesic_space(path_graph(4));
  auto gaps = diameter_sequence_gap({p, p, p});
  CHECK(gaps == std::vector<double>{0, 0, 0});

  std::vector<MetricMeasureSpace> seq;
  auto spec = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  for (int n = 1; n <= 4; ++n) {
    spec.level = n;
    seq.push_back(geodesic_space(build_member(spec).graph));
  }
  auto g = diameter_sequence_gap(seq);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i + 1] <= g[i] + 1e-12);
}

TEST_CASE("volume regularity") {
  SUBCASE("path with V(r) = r") {
    auto s = geodesic_space(path_graph(21));
    VolumeProfile V{PiecewisePower::power(1.0), 3.0};
    auto rep = volume_regularity(s, V, log_grid(0.5, 10.0, 24));
    CHECK(rep.measured_cv <= 3.0);
    CHECK(rep.pass);
  }
  SUBCASE("single point against a constant profile") {
    auto s = geodesic_space(WeightedGraph({"o"}, {2.0}, {}));
    VolumeProfile V{PiecewisePower::power(1.0), 1.0};
    std::vector<double> grid{1.0, 2.0, 4.0};
    auto rep = volume_regularity(s, V, grid);
    // m(B) = 2 always; worst of max(m/V, V/m) over r in {1, 2, 4}
    CHECK(rep.measured_cv == doctest::Approx(2.0));
  }
  SUBCASE("pre-carpet level 2, V(r) = r^2 below 1") {
    Model m = pre_carpet(2, 1);
    auto s = geodesic_space(m.graph.with_measure([&] {
      // area measure: each lattice vertex carries its share of the kept cells
      std::vector<double> w(m.graph.vertex_count(), 0.0);
      for (const Edge& e : m.graph.edges()) {
        w[e.a] += e.length * e.length / 4.0;
        w[e.b] += e.length * e.length / 4.0;
      }
      return w;
    }()));
    VolumeProfile V{PiecewisePower::power(2.0), 10.0};
    auto rep = volume_regularity(s, V, log_grid(0.2, 1.0, 8));
    CHECK(std::isfinite(rep.measured_cv));
    CHECK(rep.measured_cv <= 10.0);
  }
}

TEST_CASE("annulus bound") {
  CHECK(annulus_gamma(1.0) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-15));
  auto s = unit_grid(1001);
  auto res = annulus_ratio(s, 500, 0.25, 0.5, 1.0);
  CHECK(res.ratio == doctest::Approx(0.5).epsilon(0.01));
  CHECK(res.bound == doctest::Approx(std::pow(3.0, std::log(2.0) / std::log(3.0))).epsilon(1e-12));
  CHECK(res.bound >= 2.0 - 1e-12);
  CHECK_FALSE(res.exceeds);
  auto whole = annulus_ratio(s, 500, 0.0, 0.5, 1.0);
  CHECK(whole.ratio <= 1.0);
  CHECK(whole.bound >= 1.0);
  SUBCASE("thin shell holds just the sphere") {
    auto p = geodesic_space(path_graph(9));
    auto thin = annulus_ratio(p, 4, 2.0 - 1e-9, 2.0 + 1e-9, 1.0);
    // B(4, 2+) = {2..6}; shell = vertices at distance exactly 2
    CHECK(thin.ratio == doctest::Approx(2.0 / 5.0));
  }
}

TEST_CASE("scale functions") {
  const double b = kGasketBeta;
  PiecewisePower p{2.0, b, 1.0, 1.0};
  CHECK(p(0.5) == doctest::Approx(0.25));
  CHECK(p(2.0) == doctest::Approx(std::pow(2.0, b)));
  CHECK(p.inverse(p(3.7)) == doctest::Approx(3.7).epsilon(1e-13));
  CHECK(p.inverse(p(0.1)) == doctest::Approx(0.1).epsilon(1e-13));

  SUBCASE("rescaled profile matches l^{-beta n} Psi(l^n r) at n = 2") {
    ScaleFunction psi{p, 1.0};
    ScaleFunction psi2 = psi.rescaled(2.0, b, 2);
    for (double r : {0.01, 0.1, 0.25, 0.3, 1.0, 3.0})
      CHECK(psi2(r) == doctest::Approx(std::pow(2.0, -2 * b) * psi(4.0 * r)).epsilon(1e-13));
  }
  SUBCASE("power sandwich with the profile's own exponents and C = 1") {
    auto grid = log_grid(0.01, 100.0, 30);
    CHECK(check_power_sandwich(p, 1.0, grid).ok);
    CHECK(check_power_sandwich(PiecewisePower::power(3.0), 1.0, grid).ok);
  }
}

TEST_CASE("Phi transform") {
  ScaleFunction sq{PiecewisePower::power(2.0), 1.0};
  CHECK(phi_transform(sq, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : {0.5, 1.0, 2.0}) CHECK(phi_transform(sq, s) == doctest::Approx(s * s / 4.0).epsilon(1e-12));
  CHECK(phi_transform(sq, 0.0) == 0.0);
  ScaleFunction cube{PiecewisePower::power(3.0), 1.0};
  CHECK(phi_transform(cube, 1.0) == doctest::Approx(0.384900179459750).epsilon(1e-9));
  CHECK(phi_closed_form(3.0, 1.0) == doctest::Approx(2.0 * std::pow(3.0, -1.5)).epsilon(1e-15));

  SUBCASE("piecewise profile agrees with a brute-force supremum") {
    ScaleFunction pw{PiecewisePower{2.0, kGasketBeta, 1.0, 1.0}, 1.0};
    for (double s : {0.05, 0.7, 3.0, 40.0}) {
      double best = 0.0;
      for (double lr = -8.0; lr <= 8.0; lr += 1e-4) {
        const double r = std::exp(lr);
        best = std::max(best, s / r - 1.0 / pw(r));
      }
      CHECK(phi_transform(pw, s) == doctest::Approx(best).epsilon(1e-6));
      CHECK(phi_transform(pw, s) >= best - 1e-12);
    }
  }
  SUBCASE("sequence gaps") {
    std::vector<ScaleFunction> same(3, sq);
    for (double g : phi_sequence_gap(same, {0.5, 1.0, 2.0})) CHECK(g == 0.0);
    std::vector<ScaleFunction> conv;
    for (int n : {2, 10}) conv.push_back({PiecewisePower::power(2.0 + 1.0 / n), 1.0});
    conv.push_back(sq);
    auto grid = log_grid(0.05, 1.0, 20);
    auto gaps = phi_sequence_gap(conv, grid);
    CHECK(gaps[1] <= gaps[0]);
    CHECK(gaps[2] == 0.0);
  }
}
