#include "hkelab/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace hkelab {

const char* family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::pre_carpet: return "pre_carpet";
    case ModelFamily::gasket_cable: return "gasket_cable";
    case ModelFamily::generic_graph: return "generic_graph";
  }
  return "?";
}

ModelFamily parse_family(const std::string& s) {
  if (s == "pre_carpet" || s == "carpet") return ModelFamily::pre_carpet;
  if (s == "gasket_cable" || s == "gasket") return ModelFamily::gasket_cable;
  if (s == "generic_graph" || s == "graph") return ModelFamily::generic_graph;
  fail(ErrorCode::invalid_argument, "unknown model family '" + s + "'");
}

FractalModelSpec FractalModelSpec::defaults(ModelFamily f) {
  FractalModelSpec s;
  s.family = f;
  switch (f) {
    case ModelFamily::pre_carpet:
      s.contraction = 3;
      s.alpha = kCarpetAlpha;
      break;
    case ModelFamily::gasket_cable:
      s.contraction = 2;
      s.alpha = kGasketAlpha;
      s.beta = kGasketBeta;
      break;
    case ModelFamily::generic_graph:
      s.contraction = 2;
      s.alpha = 1.0;
      s.beta = 2.0;
      break;
  }
  return s;
}

void FractalModelSpec::validate() const {
  require(level >= 0, "level must be >= 0");
  require(contraction >= 2, "contraction l must be an integer >= 2");
  require(subdivision >= 1, "subdivision m must be >= 1");
  require(window >= 1, "window must be >= 1");
  require(alpha > 0.0, "alpha must be positive");
  require(beta > 0.0, "beta must be positive (carpet beta must be supplied or fitted)");
  if (family == ModelFamily::generic_graph) require(!graph_file.empty(), "graph_file required");
}

namespace {

void check_cap(std::size_t estimate, std::size_t cap) {
  if (estimate > cap)
    fail(ErrorCode::invalid_argument, "model needs ~" + std::to_string(estimate) +
                                          " vertices, above the vertex-count limit " +
                                          std::to_string(cap));
}

using Lattice = std::pair<long, long>;

bool carpet_keeps(long i, long j) {
  while (i > 0 || j > 0) {
    if (i % 3 == 1 && j % 3 == 1) return false;
    i /= 3;
    j /= 3;
  }
  return true;
}

// Unit-lattice carpet on [0, N]^2 with N = W 3^n; lattice neighbours are
// joined when they border a retained cell.
Model carpet_lattice(int n, int window, std::size_t cap, double spacing, double measure_scale) {
  require(n >= 0 && window >= 1, "carpet needs n >= 0 and W >= 1");
  const long N = window * static_cast<long>(std::lround(std::pow(3.0, n)));
  check_cap(static_cast<std::size_t>((N + 1) * (N + 1)), cap);
  std::set<std::pair<Lattice, Lattice>> edge_set;
  for (long i = 0; i < N; ++i)
    for (long j = 0; j < N; ++j) {
      if (!carpet_keeps(i, j)) continue;
      Lattice c[4] = {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
      for (int k = 0; k < 4; ++k) edge_set.insert(std::minmax(c[k], c[(k + 1) % 4]));
    }
  std::map<Lattice, Index> idx;
  for (const auto& [a, b] : edge_set) {
    idx.emplace(a, 0);
    idx.emplace(b, 0);
  }
  Model out;
  std::vector<std::string> ids;
  Index k = 0;
  for (auto& [p, i] : idx) {
    i = k++;
    ids.push_back("c" + std::to_string(p.first) + "_" + std::to_string(p.second));
    out.coords.push_back({p.first * spacing, p.second * spacing});
  }
  std::vector<double> measure(ids.size(), 0.0);
  std::vector<Edge> edges;
  for (const auto& [a, b] : edge_set) {
    Index ia = idx[a], ib = idx[b];
    edges.push_back({ia, ib, spacing, 1.0});
    measure[ia] += spacing / 2.0;
    measure[ib] += spacing / 2.0;
  }
  for (double& m : measure) m *= measure_scale;
  out.graph = WeightedGraph(std::move(ids), std::move(measure), std::move(edges));
  return out;
}

}  // namespace

Model pre_carpet(int n, int window, std::size_t cap) {
  const double h = std::pow(3.0, -n);
  return carpet_lattice(n, window, cap, h, h);
}

Model carpet_base(int n, int window, std::size_t cap) {
  return carpet_lattice(n, window, cap, 1.0, 1.0);
}

Model gasket_cable(int n, int m, std::size_t cap) {
  require(n >= 0 && m >= 1, "gasket needs n >= 0 and m >= 1");
  const double p3 = std::pow(3.0, n);
  check_cap(static_cast<std::size_t>(3.0 * (p3 + 1.0) / 2.0 + 3.0 * p3 * (m - 1)), cap);
  // Triangles in lattice coordinates (a, b) with planar point a e1 + b e2,
  // e1 = (1,0), e2 = (1/2, sqrt3/2).
  using Tri = std::array<Lattice, 3>;
  std::vector<Tri> tris{{Lattice{0, 0}, Lattice{1, 0}, Lattice{0, 1}}};
  for (int k = 0; k < n; ++k) {
    const long s = 1L << k;
    std::vector<Tri> next;
    for (const Lattice& off : {Lattice{0, 0}, Lattice{s, 0}, Lattice{0, s}})
      for (const Tri& t : tris) {
        Tri u;
        for (int i = 0; i < 3; ++i) u[i] = {t[i].first + off.first, t[i].second + off.second};
        next.push_back(u);
      }
    tris = std::move(next);
  }
  std::set<std::pair<Lattice, Lattice>> edge_set;
  for (const Tri& t : tris)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) edge_set.insert(std::minmax(t[i], t[j]));
  std::map<Lattice, Index> idx;
  for (const auto& [a, b] : edge_set) {
    idx.emplace(a, 0);
    idx.emplace(b, 0);
  }
  Model out;
  std::vector<std::string> ids;
  const double h = std::sqrt(3.0) / 2.0;
  Index k = 0;
  for (auto& [p, i] : idx) {
    i = k++;
    ids.push_back("g" + std::to_string(p.first) + "_" + std::to_string(p.second));
    out.coords.push_back({p.first + 0.5 * p.second, p.second * h});
  }
  const double len = 1.0 / m;
  std::vector<Edge> edges;
  Index e = 0;
  for (const auto& [a, b] : edge_set) {
    Index ia = idx[a], ib = idx[b];
    Index prev = ia;
    const Point2 pa = out.coords[ia], pb = out.coords[ib];
    for (int s = 1; s < m; ++s) {
      Index v = ids.size();
      ids.push_back("e" + std::to_string(e) + "_" + std::to_string(s));
      double f = static_cast<double>(s) / m;
      out.coords.push_back({pa.x + (pb.x - pa.x) * f, pa.y + (pb.y - pa.y) * f});
      edges.push_back({prev, v, len, 1.0 / len});
      prev = v;
    }
    edges.push_back({prev, ib, len, 1.0 / len});
    ++e;
  }
  std::vector<double> measure(ids.size(), 0.0);
  for (const Edge& ed : edges) {
    measure[ed.a] += ed.length / 2.0;
    measure[ed.b] += ed.length / 2.0;
  }
  out.graph = WeightedGraph(std::move(ids), std::move(measure), std::move(edges));
  return out;
}

Model rescale(const Model& base, double l, double alpha, double beta, int n) {
  require(l > 1.0, "rescale needs l > 1");
  if (n == 0) return base;
  const double len = std::pow(l, -n);
  const double mass = std::pow(l, -alpha * n);
  const double cond = std::pow(l, (beta - alpha) * n);
  std::vector<double> measure = base.graph.measure();
  for (double& m : measure) m *= mass;
  std::vector<Edge> edges = base.graph.edges();
  for (Edge& e : edges) {
    e.length *= len;
    e.conductance *= cond;
  }
  Model out;
  out.graph = WeightedGraph(base.graph.ids(), std::move(measure), std::move(edges));
  out.coords = base.coords;
  for (Point2& p : out.coords) {
    p.x *= len;
    p.y *= len;
  }
  return out;
}

Model ingest_graph(const std::string& path) {
  Model m;
  m.graph = read_graph_file(path);
  return m;
}

Model build_member(const FractalModelSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case ModelFamily::pre_carpet:
      return rescale(carpet_base(spec.level, spec.window, spec.vertex_cap), spec.contraction,
                     spec.alpha, spec.beta, spec.level);
    case ModelFamily::gasket_cable:
      return rescale(gasket_cable(spec.level, spec.subdivision, spec.vertex_cap),
                     spec.contraction, spec.alpha, spec.beta, spec.level);
    case ModelFamily::generic_graph:
      return ingest_graph(spec.graph_file);
  }
  fail(ErrorCode::internal, "unhandled family");
}

double carpet_resistance(int n) {
  Model m = carpet_base(n, 1);
  const auto& g = m.graph;
  const double N = std::pow(3.0, n);
  const std::size_t nv = g.vertex_count();
  // Unknowns are the vertices strictly between the two faces.
  std::vector<long> slot(nv, -1);
  std::vector<double> boundary(nv, -1.0);
  long free_count = 0;
  for (Index v = 0; v < nv; ++v) {
    if (m.coords[v].x == 0.0) boundary[v] = 1.0;
    else if (m.coords[v].x == N) boundary[v] = 0.0;
    else slot[v] = free_count++;
  }
  if (free_count == 0) {
    // Level 0: one square, two parallel unit resistors between the faces.
    double conductance = 0.0;
    for (const Edge& e : g.edges())
      if (boundary[e.a] >= 0 && boundary[e.b] >= 0 && boundary[e.a] != boundary[e.b])
        conductance += e.conductance;
    return 1.0 / conductance;
  }
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_count);
  for (const Edge& e : g.edges()) {
    const Index ends[2] = {e.a, e.b};
    for (int s = 0; s < 2; ++s) {
      Index u = ends[s], w = ends[1 - s];
      if (slot[u] < 0) continue;
      trip.emplace_back(slot[u], slot[u], e.conductance);
      if (slot[w] >= 0) trip.emplace_back(slot[u], slot[w], -e.conductance);
      else rhs(slot[u]) += e.conductance * boundary[w];
    }
  }
  Eigen::SparseMatrix<double> K(free_count, free_count);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::numerical, "resistance factorization failed");
  Eigen::VectorXd u = ldlt.solve(rhs);
  auto value = [&](Index v) { return slot[v] >= 0 ? u(slot[v]) : boundary[v]; };
  double energy = 0.0;
  for (const Edge& e : g.edges()) {
    double d = value(e.a) - value(e.b);
    energy += e.conductance * d * d;
  }
  return 1.0 / energy;
}

CarpetBetaFit fit_carpet_beta(int finest_level) {
  require(finest_level >= 1, "beta fit needs finest level >= 1");
  CarpetBetaFit fit;
  for (int n = 0; n <= finest_level; ++n) fit.resistance.push_back(carpet_resistance(n));
  fit.rho = fit.resistance[finest_level] / fit.resistance[finest_level - 1];
  fit.beta = std::log(8.0 * fit.rho) / std::log(3.0);
  return fit;
}

ScaleFunction base_scale_function(const FractalModelSpec& spec) {
  if (spec.family == ModelFamily::generic_graph) return {PiecewisePower::power(spec.beta), 1.0};
  // Below unit length the cables carry one-dimensional diffusion.
  return {PiecewisePower{2.0, spec.beta, 1.0, 1.0}, 1.0};
}

PiecewisePower base_volume(const FractalModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::gasket_cable: return {1.0, spec.alpha, 1.0, 1.0};
    case ModelFamily::pre_carpet: return {2.0, spec.alpha, 1.0, 1.0};
    case ModelFamily::generic_graph: return PiecewisePower::power(spec.alpha);
  }
  return PiecewisePower::power(spec.alpha);
}

}  // namespace hkelab
