#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hkelab/form.hpp"
#include "hkelab/heat_kernel.hpp"
#include "hkelab/metric_space.hpp"
#include "hkelab/models.hpp"
#include "hkelab/spectral.hpp"

using namespace hkelab;

namespace {

struct Setup {
  WeightedGraph g;
  MetricMeasureSpace s;
  GraphDirichletForm form;
  explicit Setup(WeightedGraph graph) : g(std::move(graph)), s(geodesic_space(g)), form(g) {}
};

// Fixed 5-vertex graph with uneven data; the kernel oracle below is
// expm(-t M^-1 K) M^-1 computed independently.
WeightedGraph five_vertex() {
  return WeightedGraph({"a", "b", "c", "d", "e"}, {1.0, 2.0, 0.5, 1.5, 1.0},
                       {{0, 1, 1, 1.0}, {1, 2, 1, 2.0}, {2, 3, 1, 0.5}, {3, 4, 1, 1.5},
                        {4, 0, 1, 1.0}, {1, 3, 1, 0.7}});
}

Setup gasket_member(int n) {
  auto spec = FractalModelSpec::defaults(ModelFamily::gasket_cable);
  spec.level = n;
  return Setup(build_member(spec).graph);
}

}  // namespace

TEST_CASE("ball parts") {
  Setup path(path_graph(3));
  auto whole = assemble_part(path.s, 1, 10.0);
  CHECK(whole.full);
  CHECK(whole.interior == PointSet{0, 1, 2});
  auto centre = assemble_part(path.s, 1, 1.0);
  CHECK(centre.interior == PointSet{1});
  CHECK_FALSE(centre.full);
  CHECK_THROWS_AS(assemble_part(path.s, 1, 0.0), Error);

  Model carpet = pre_carpet(2, 1);
  auto cs = geodesic_space(carpet.graph);
  // (1/3, 1/3): corner of the central hole, the lattice point nearest the centre
  const Index mid = carpet.graph.index_of("c3_3");
  auto part = assemble_part(cs, mid, 0.5);
  CHECK(!part.interior.empty());
  CHECK(part.interior.size() < carpet.graph.vertex_count());
  for (Index v : part.interior) {
    CHECK(carpet.coords[v].x >= 0.0);
    CHECK(carpet.coords[v].x < 5.0 / 6.0);
    CHECK(carpet.coords[v].y >= 0.0);
    CHECK(carpet.coords[v].y < 5.0 / 6.0);
  }
  auto inner = assemble_part(cs, mid, 0.3);
  for (Index v : inner.interior) {
    CHECK(carpet.coords[v].x > 0.0);
    CHECK(carpet.coords[v].y > 0.0);
  }
}

TEST_CASE("spectra") {
  SUBCASE("single interior vertex") {
    Setup p(path_graph(3));
    auto sp = spectrum(p.form, assemble_part(p.s, 1, 1.0));
    REQUIRE(sp.count() == 1);
    CHECK(sp.values(0) == doctest::Approx(2.0));
    CHECK(std::abs(sp.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(sp.complete);
  }
  SUBCASE("Dirichlet path with three interior vertices") {
    Setup p(path_graph(5));
    auto sp = spectrum(p.form, assemble_part(p.s, 2, 2.0));
    REQUIRE(sp.count() == 3);
    for (int j = 1; j <= 3; ++j)
      CHECK(sp.values(j - 1) == doctest::Approx(2.0 * (1.0 - std::cos(j * std::numbers::pi / 4.0))).epsilon(1e-13));
    CHECK(sp.gram_error <= 1e-10);
    CHECK(sp.residual <= 1e-8);
  }
  SUBCASE("two-vertex full graph") {
    Setup p(path_graph(2));
    auto sp = spectrum(p.form, full_part(p.s));
    CHECK(sp.values(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(sp.values(1) == doctest::Approx(2.0));
    Eigen::MatrixXd gram = sp.vectors.transpose() * sp.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("partial spectra: Lanczos agrees with the dense solver") {
    auto g = gasket_member(4);
    auto part = assemble_part(g.s, 0, 1.0);
    SpectralOptions lanczos;
    lanczos.dense_cap = 10;
    auto dense = spectrum(g.form, part);
    auto sparse = spectrum(g.form, part, 8, lanczos);
    CHECK(std::string(sparse.solver) != std::string(dense.solver));
    REQUIRE(sparse.count() == 8);
    for (int j = 0; j < 8; ++j) CHECK(sparse.values(j) == doctest::Approx(dense.values(j)).epsilon(1e-9));
    CHECK_FALSE(sparse.complete);
    CHECK_THROWS_AS(spectrum(g.form, part, 0, lanczos), Error);
  }
  SUBCASE("nested balls: eigenvalues of the larger ball are smaller") {
    auto g = gasket_member(3);
    auto small = spectrum(g.form, assemble_part(g.s, 0, 0.5));
    auto large = spectrum(g.form, assemble_part(g.s, 0, 1.0));
    CHECK(eigenvalues_dominated(large, small));
  }
}

TEST_CASE("heat kernels") {
  SUBCASE("two-vertex graph") {
    Setup p(path_graph(2));
    auto sp = spectrum(p.form, full_part(p.s));
    for (double t : {0.1, 1.0, 3.0}) {
      auto K = heat_kernel(sp, t);
      CHECK(K(0, 0) == doctest::Approx(0.5 + 0.5 * std::exp(-2 * t)).epsilon(1e-14));
      CHECK(K(0, 1) == doctest::Approx(0.5 - 0.5 * std::exp(-2 * t)).epsilon(1e-14));
      CHECK(K(0, 1) == K(1, 0));
      auto defect = conservativeness_defect(sp, t);
      CHECK(defect.cwiseAbs().maxCoeff() <= 1e-14);
      Eigen::VectorXd one = Eigen::VectorXd::Ones(2);
      CHECK((semigroup_apply(sp, t, one) - one).cwiseAbs().maxCoeff() <= 1e-14);
    }
    CHECK_THROWS_AS(heat_kernel(sp, 0.0), Error);
    Eigen::VectorXd f(2);
    f << 0.3, -1.0;
    CHECK((semigroup_apply(sp, 0.0, f) - f).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("single interior vertex") {
    Setup p(path_graph(3));
    auto sp = spectrum(p.form, assemble_part(p.s, 1, 1.0));
    CHECK(heat_kernel(sp, 0.4)(0, 0) == doctest::Approx(std::exp(-0.8)).epsilon(1e-14));
    CHECK(conservativeness_defect(sp, 0.4)(0) == doctest::Approx(1.0 - std::exp(-0.8)).epsilon(1e-13));
  }
  SUBCASE("5-vertex graph against the matrix-exponential oracle") {
    Setup p(five_vertex());
    auto sp = spectrum(p.form, full_part(p.s));
    auto K = heat_kernel(sp, 1.0);
    CHECK(K(0, 0) == doctest::Approx(0.266176372188582).epsilon(1e-12));
    CHECK(K(0, 3) == doctest::Approx(0.122859884307197).epsilon(1e-12));
    CHECK(K(2, 4) == doctest::Approx(0.105216975418933).epsilon(1e-12));
    CHECK(K(1, 1) == doctest::Approx(0.226314029926148).epsilon(1e-12));
    auto chk = semigroup_identities(sp, 0.3, 0.7, true, 11);
    CHECK(chk.chapman_kolmogorov <= 1e-10);
    CHECK(chk.symmetry == 0.0);
    CHECK(chk.conservation <= 1e-10);
    CHECK(chk.contraction_excess <= 1e-12);
    CHECK(chk.markov_excess <= 1e-10);
  }
  SUBCASE("Markov bounds on a gasket piece") {
    auto g = gasket_member(2);
    auto part = assemble_part(g.s, 0, 0.6);
    REQUIRE(part.interior.size() >= 5);
    auto sp = spectrum(g.form, part);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd f(static_cast<Eigen::Index>(sp.interior_size()));
    for (int trial = 0; trial < 10; ++trial) {
      for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = u(rng);
      auto out = semigroup_apply(sp, 0.5, f);
      CHECK(out.minCoeff() >= -1e-10);
      CHECK(out.maxCoeff() <= 1.0 + 1e-10);
    }
  }
  SUBCASE("truncated expansions report their tail bound") {
    auto g = gasket_member(3);
    auto part = assemble_part(g.s, 0, 1.0);
    SpectralOptions o;
    o.dense_cap = 5;
    auto sp = spectrum(g.form, part, 6, o);
    const double tb = truncation_bound(sp, 0.1);
    CHECK(tb > 0.0);
    CHECK(tb <= static_cast<double>(part.interior.size() - 6));
  }
}

TEST_CASE("kernel limit in R") {
  SUBCASE("radii beyond the diameter give identical kernels") {
    Setup p(path_graph(5));
    auto fam = kernel_limit_in_R(p.form, p.s, 2, {10.0, 20.0}, 0.5);
    CHECK(fam.successive_gap[0] == 0.0);
  }
  SUBCASE("path: nested balls are entrywise nondecreasing") {
    Setup p(path_graph(9));
    auto fam = kernel_limit_in_R(p.form, p.s, 4, {1.5, 2.5, 3.5}, 0.7);
    CHECK(fam.worst_monotonicity <= 1e-12);
    CHECK(fam.kernels.size() == 3);
  }
  SUBCASE("gasket level 3: monotone family, limit reached past the diameter") {
    // The scaled level-3 gasket has diameter 1, so this family saturates
    // instead of showing the decay of an unbounded space.
    auto g = gasket_member(3);
    auto fam = kernel_limit_in_R(g.form, g.s, 0, {0.5, 1.0, 2.0, 3.0}, 0.1);
    CHECK(fam.worst_monotonicity <= 1e-12);
    CHECK(fam.successive_gap[0] > 0.0);
    CHECK(fam.successive_gap[2] == 0.0);
  }
  CHECK_THROWS_AS(kernel_limit_in_R(GraphDirichletForm(path_graph(3)), geodesic_space(path_graph(3)), 1,
                                    {2.0, 1.0}, 0.1),
                  Error);
}

TEST_CASE("conservativeness on balls") {
  auto g = gasket_member(3);
  const ScaleFunction psi{PiecewisePower::power(kGasketBeta), 1.0};
  std::vector<double> x, defects;
  const double t = 0.02;
  double prev = 2.0;
  for (double R : {0.3, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0}) {
    auto sp = spectrum(g.form, assemble_part(g.s, 0, R));
    const double d = conservativeness_defect(sp, t)(0);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d <= prev + 1e-12);
    prev = d;
    x.push_back(psi(R) / t);
    defects.push_back(d);
  }
  auto fit = fit_comparison(x, defects, kGasketBeta);
  CHECK(fit.expected == doctest::Approx(1.0 / (kGasketBeta - 1.0)));
  CHECK(fit.exponent == doctest::Approx(fit.expected).epsilon(0.30));
}

TEST_CASE("cutoff capacity") {
  const ScaleFunction sq{PiecewisePower::power(2.0), 1.0};
  const PiecewisePower lin = PiecewisePower::power(1.0);
  Setup star(star_graph(4));
  const Index c = star.g.index_of("c");
  auto res = cutoff_capacity(star.form, star.s, c, 1.0, 0.5, sq, lin);
  CHECK(res.energy == doctest::Approx(4.0));
  CHECK(res.ratio == doctest::Approx(4.0));
  auto flat = cutoff_capacity(star.form, star.s, c, 100.0, 0.999, sq, lin);
  CHECK(flat.energy == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(cutoff_capacity(star.form, star.s, c, 1.0, 1.0, sq, lin), Error);

  SUBCASE("carpet level 2: ratio bounded across r") {
    auto spec = FractalModelSpec::defaults(ModelFamily::pre_carpet);
    spec.level = 2;
    spec.beta = fit_carpet_beta(3).beta;
    Model m = build_member(spec);
    auto s = geodesic_space(m.graph);
    GraphDirichletForm form(m.graph);
    auto psi = base_scale_function(spec).rescaled(3.0, spec.beta, 2);
    auto V = base_volume(spec).rescaled(3.0, spec.alpha, 2);
    const Index mid = m.graph.index_of("c3_3");
    double lo = INFINITY, hi = 0.0;
    for (double r : {0.25, 0.35, 0.5, 0.7}) {
      auto cr = cutoff_capacity(form, s, mid, r, 0.5, psi, V);
      lo = std::min(lo, cr.ratio);
      hi = std::max(hi, cr.ratio);
    }
    CHECK(hi / lo <= 2.0);
  }
}
