#include <cmath>

#include "doctest.h"
#include "hkelab/form.hpp"
#include "hkelab/heat_kernel.hpp"
#include "hkelab/spectral.hpp"
#include "hkelab/metric_space.hpp"
#include "hkelab/models.hpp"

using namespace hkelab;

TEST_CASE("pre-carpet enumeration") {
  // counts from an independent enumeration of the kept subcells
  struct Row {
    int n;
    std::size_t v, e;
  };
  for (Row r : {Row{0, 4, 4}, Row{1, 16, 24}, Row{2, 96, 168}, Row{3, 688, 1272}}) {
    CAPTURE(r.n);
    Model m = pre_carpet(r.n, 1);
    CHECK(m.graph.vertex_count() == r.v);
    CHECK(m.graph.edge_count() == r.e);
  }
  Model m = pre_carpet(1, 1);
  for (const Edge& e : m.graph.edges()) CHECK(e.length == doctest::Approx(1.0 / 3.0));
  CHECK(pre_carpet(1, 2).graph.vertex_count() > 16);
  CHECK_THROWS_AS(pre_carpet(9, 3, 20000), Error);
}

TEST_CASE("gasket cable enumeration") {
  struct Row {
    int n, m;
    std::size_t v, e;
  };
  for (Row r : {Row{0, 1, 3, 3}, Row{1, 1, 6, 9}, Row{1, 2, 15, 18}, Row{2, 1, 15, 27},
                Row{2, 2, 42, 54}, Row{3, 2, 123, 162}}) {
    CAPTURE(r.n);
    CAPTURE(r.m);
    Model g = gasket_cable(r.n, r.m);
    CHECK(g.graph.vertex_count() == r.v);
    CHECK(g.graph.edge_count() == r.e);
  }
  SUBCASE("cable edges have length 1/m and conductance m") {
    Model g = gasket_cable(1, 2);
    for (const Edge& e : g.graph.edges()) {
      CHECK(e.length == 0.5);
      CHECK(e.conductance == 2.0);
    }
    // total measure = total cable length = 9 unit edges
    CHECK(g.graph.total_measure() == doctest::Approx(9.0));
  }
}

TEST_CASE("rescaling") {
  Model base = gasket_cable(2, 1);
  SUBCASE("n = 0 is the identity") {
    Model same = rescale(base, 2.0, kGasketAlpha, kGasketBeta, 0);
    CHECK(same.graph.measure() == base.graph.measure());
    CHECK(same.graph.edges()[3].conductance == base.graph.edges()[3].conductance);
  }
  SUBCASE("factors") {
    Model r = rescale(base, 2.0, kGasketAlpha, kGasketBeta, 2);
    CHECK(r.graph.edges()[0].length == doctest::Approx(0.25));
    CHECK(r.graph.measure()[0] == doctest::Approx(base.graph.measure()[0] / 9.0));
    CHECK(r.graph.edges()[0].conductance == doctest::Approx(std::pow(5.0 / 3.0, 2)));
  }
  SUBCASE("carpet heat kernel obeys p1(t,x,x) = 8 p0(3^beta t, x, x)") {
    const double beta = 2.1;
    Model m0 = carpet_base(1, 1);
    Model m1 = rescale(m0, 3.0, kCarpetAlpha, beta, 1);
    GraphDirichletForm f0(m0.graph), f1(m1.graph);
    auto s0 = spectrum(f0, full_part(geodesic_space(m0.graph)));
    auto s1 = spectrum(f1, full_part(geodesic_space(m1.graph)));
    for (double t : {0.01, 0.1, 1.0}) {
      auto p0 = heat_kernel(s0, std::pow(3.0, beta) * t);
      auto p1 = heat_kernel(s1, t);
      for (Eigen::Index x = 0; x < p0.rows(); ++x)
        CHECK(p1(x, x) == doctest::Approx(8.0 * p0(x, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("carpet resistance and beta fit") {
  // independent sparse solve of the face-to-face potential problem
  CHECK(carpet_resistance(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(carpet_resistance(1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(carpet_resistance(2) == doctest::Approx(1.00858655171847).epsilon(1e-11));
  CHECK(carpet_resistance(3) == doctest::Approx(1.30317279759737).epsilon(1e-11));
  auto fit = fit_carpet_beta(3);
  CHECK(fit.rho == doctest::Approx(1.30317279759737 / 1.00858655171847).epsilon(1e-11));
  CHECK(fit.beta == doctest::Approx(std::log(8.0 * fit.rho) / std::log(3.0)).epsilon(1e-14));
  CHECK(fit.beta > 2.0);
  CHECK(fit.beta <= kCarpetAlpha + 1.0);
}

TEST_CASE("model spec validation") {
  auto s = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  s.level = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  s.subdivision = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(parse_family("carpet") == ModelFamily::pre_carpet);
  CHECK(parse_family("gasket") == ModelFamily::gasket_cable);
  CHECK_THROWS_AS(parse_family("sponge"), Error);
}

TEST_CASE("base profiles") {
  auto s = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  auto psi = base_scale_function(s);
  CHECK(psi(0.5) == doctest::Approx(0.25));
  CHECK(psi(2.0) == doctest::Approx(5.0));
  auto V = base_volume(s);
  CHECK(V(0.5) == doctest::Approx(0.5));
  CHECK(V(2.0) == doctest::Approx(3.0));
}
