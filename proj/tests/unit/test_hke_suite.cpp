#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hkelab/convergence.hpp"
#include "hkelab/form.hpp"
#include "hkelab/hke.hpp"
#include "hkelab/models.hpp"

using namespace hkelab;

namespace {

const ScaleFunction kSquare{PiecewisePower::power(2.0), 1.0};

SpectralData full_spectrum(const WeightedGraph& g) {
  return spectrum(GraphDirichletForm(g), full_part(geodesic_space(g)));
}

// Dirichlet conditions at both ends of a path with unit weights
SpectralData path_dirichlet(std::size_t interior) {
  auto g = path_graph(interior + 2);
  BallPart part;
  for (Index i = 1; i <= interior; ++i) part.interior.push_back(i);
  part.radius = static_cast<double>(interior + 1);
  return spectrum(GraphDirichletForm(g), part);
}

struct GasketRun {
  SequenceMember m;
  SpectralData spec;
  std::vector<double> grid;
};

GasketRun gasket_run(int n) {
  auto spec = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  GasketRun r{make_member(spec, n), {}, {}};
  r.spec = spectrum(GraphDirichletForm(r.m.model.graph), full_part(r.m.space));
  r.grid = bulk_t_grid(r.m.psi, r.m.mesh, 1.0, 10);
  return r;
}

}  // namespace

TEST_CASE("bulk grid") {
  auto g = bulk_t_grid(kSquare, 0.01, 1.0, 5);
  CHECK(g.front() == doctest::Approx(4e-4));
  CHECK(g.back() == doctest::Approx(1.0 / 16.0));
  CHECK(g.size() == 5);
  CHECK_THROWS_AS(bulk_t_grid(kSquare, 0.5, 1.0, 5), Error);
}

TEST_CASE("HKE bounds") {
  SUBCASE("two-vertex graph at large t") {
    auto sp = full_spectrum(path_graph(2));
    auto s = geodesic_space(path_graph(2));
    PiecewisePower total{0.0, 0.0, 1.0, 2.0};  // V == total mass
    auto rep = hke_bounds_check(s, sp, total, kSquare, {20.0, 40.0, 80.0});
    // p -> 1/2 so p V -> 1; off the diagonal t Phi(1/t) = 1/(4t) with Psi = r^2, worst at t = 20
    CHECK(rep.get("C_1") == doctest::Approx(std::exp(1.0 / 80.0)).epsilon(1e-12));
    CHECK(rep.pass);
  }
  SUBCASE("gasket: correct scaling is stable, r^2 blows up") {
    std::vector<double> good, wrong;
    for (int n : {4, 5}) {
      auto r = gasket_run(n);
      auto rep = hke_bounds_check(r.m.space, r.spec, r.m.volume, r.m.psi, r.grid);
      good.push_back(rep.get("C_1"));
      CHECK(rep.pass);
      CHECK(rep.get("C_1") <= 50.0);
      CHECK(rep.get("c_2") == 1.0);
      CHECK(rep.witnesses.size() == 2);
      wrong.push_back(hke_bounds_check(r.m.space, r.spec, r.m.volume, kSquare, r.grid).get("C_1"));
    }
    CHECK(good[1] / good[0] <= 2.0);
    CHECK(good[1] / good[0] >= 0.5);
    CHECK(wrong[1] / wrong[0] >= 2.0);
  }
}

TEST_CASE("Weyl bound") {
  auto one = path_dirichlet(1);
  CHECK(weyl_check(one, kSquare, 1.0).get("C_weyl") == doctest::Approx(2.0));

  auto three = path_dirichlet(3);
  auto rep = weyl_check(three, kSquare, 4.0);
  const double l1 = 2.0 - std::sqrt(2.0), l3 = 2.0 + std::sqrt(2.0);
  const double expect = std::max({l1 * 16.0, 2.0 * 4.0, l3 * 16.0 / 9.0});
  CHECK(rep.get("C_weyl") == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rep.get("C_weyl") == doctest::Approx(9.37).epsilon(1e-3));
  REQUIRE(rep.profile.size() == 3);
  CHECK(rep.profile[1] == doctest::Approx(8.0));

  SUBCASE("path oracle with R = N + 1 sits in [8, pi^2 + 0.5]") {
    for (std::size_t N : {3, 7, 15, 31}) {
      auto sp = path_dirichlet(N);
      const double c = weyl_check(sp, kSquare, static_cast<double>(N + 1)).get("C_weyl");
      CAPTURE(N);
      CHECK(c >= 8.0);
      CHECK(c <= std::numbers::pi * std::numbers::pi + 0.5);
    }
  }
  SUBCASE("gasket levels 3 and 4 agree within a factor 2") {
    auto spec = FractalModelSpec::defaults(ModelFamily::gasket_cable);
    std::vector<double> c;
    for (int n : {3, 4}) {
      auto m = make_member(spec, n);
      auto sp = spectrum(GraphDirichletForm(m.model.graph), assemble_part(m.space, 0, 1.0));
      c.push_back(weyl_check(sp, m.psi, 1.0).get("C_weyl"));
    }
    CHECK(c[1] / c[0] <= 2.0);
    CHECK(c[1] / c[0] >= 0.5);
  }
}

TEST_CASE("eigenfunction sup bound") {
  const std::vector<double> grid = log_grid(0.01, 100.0, 41);
  auto one = path_dirichlet(1);
  const PiecewisePower lin = PiecewisePower::power(1.0);
  auto rep = eigfun_sup_check(one, lin, kSquare, grid);
  double inf = INFINITY;
  for (double t : grid) inf = std::min(inf, std::exp(2.0 * t) / std::sqrt(std::sqrt(t)));
  CHECK(rep.get("C_eig") == doctest::Approx(1.0 / inf).epsilon(1e-12));

  SUBCASE("path eigenvectors against sin(j pi k / (N+1))") {
    const std::size_t N = 5;
    auto sp = path_dirichlet(N);
    auto r = eigfun_sup_check(sp, lin, kSquare, grid);
    for (std::size_t j = 1; j <= N; ++j) {
      // unit-measure normalisation: sum_k sin^2 = (N+1)/2
      double sup = 0.0;
      for (std::size_t k = 1; k <= N; ++k)
        sup = std::max(sup, std::abs(std::sin(std::numbers::pi * j * k / (N + 1.0))));
      sup *= std::sqrt(2.0 / (N + 1.0));
      const double lam = 2.0 * (1.0 - std::cos(std::numbers::pi * j / (N + 1.0)));
      double in = INFINITY;
      for (double t : grid) in = std::min(in, std::exp(lam * t) / std::sqrt(std::sqrt(t)));
      CAPTURE(j);
      CHECK(r.profile[j - 1] == doctest::Approx(sup / in).epsilon(1e-10));
    }
  }
  SUBCASE("gasket: max ratio stable across levels") {
    std::vector<double> c;
    for (int n : {4, 5}) {
      auto r = gasket_run(n);
      c.push_back(eigfun_sup_check(r.spec, r.m.volume, r.m.psi, r.grid).get("C_eig"));
    }
    CHECK(c[1] / c[0] <= 2.0);
    CHECK(c[1] / c[0] >= 0.5);
  }
}

TEST_CASE("Hoelder fit") {
  SUBCASE("single vertex: C = 0 for every Theta") {
    auto g = WeightedGraph({"o"}, {1.0}, {});
    auto sp = full_spectrum(g);
    auto rep = holder_fit(geodesic_space(g), sp, PiecewisePower::power(1.0), kSquare, {0.5, 1.0});
    CHECK(rep.get("Theta") == 1.0);
    CHECK(rep.get("C_H") == 0.0);
  }
  SUBCASE("two-vertex graph reproduces e^{-2t} r^Theta V(r)") {
    auto g = path_graph(2);
    auto sp = full_spectrum(g);
    std::vector<double> grid{1.0, 2.0, 4.0};
    auto rep = holder_fit(geodesic_space(g), sp, PiecewisePower::power(1.0), kSquare, grid);
    // d = 1 needs r = sqrt(t) >= 1; the worst sample is t = 1
    double expect = 0.0;
    for (double t : grid) expect = std::max(expect, std::exp(-2.0 * t) * std::sqrt(t) * std::sqrt(t));
    CHECK(rep.get("Theta") == 1.0);
    CHECK(rep.get("C_H") == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("carpet level 2 admits some Theta") {
    auto spec = FractalModelSpec::defaults(ModelFamily::pre_carpet);
    spec.beta = fit_carpet_beta(3).beta;
    auto m = make_member(spec, 2);
    auto sp = spectrum(GraphDirichletForm(m.model.graph), full_part(m.space));
    auto rep = holder_fit(m.space, sp, m.volume, m.psi, bulk_t_grid(m.psi, m.mesh, 1.0, 6));
    CHECK(rep.pass);
    CHECK(rep.get("Theta") >= 0.05);
    CHECK(std::isfinite(rep.get("C_H")));
  }
}

TEST_CASE("on-diagonal fit") {
  SUBCASE("single vertex: flat at 1/m") {
    auto g = WeightedGraph({"o"}, {4.0}, {});
    auto sp = full_spectrum(g);
    std::vector<double> t = log_grid(1.0, 100.0, 6), d;
    for (double x : t) d.push_back(heat_kernel(sp, x)(0, 0));
    CHECK(d.back() == doctest::Approx(0.25));
    CHECK(ondiag_fit(t, d).slope == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("exact power law") {
    std::vector<double> t = log_grid(0.01, 1.0, 7), d;
    for (double x : t) d.push_back(3.0 * std::pow(x, -0.6826));
    auto fit = ondiag_fit(t, d);
    CHECK(fit.slope == doctest::Approx(-0.6826).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.log_t.size() == 7);
  }
  CHECK_THROWS_AS(ondiag_fit({1, 2, 3, 4}, {1, 1, 1, 1}), Error);
}
