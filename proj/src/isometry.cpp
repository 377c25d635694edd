#include "hkelab/isometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "hkelab/format.hpp"

namespace hkelab {

namespace {

inline double D(const MetricMeasureSpace& s, Index a, Index b) {
  return s.dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

double map_distortion(const MetricMeasureSpace& S, const MetricMeasureSpace& T,
                      const std::vector<Index>& f) {
  double worst = 0.0;
  for (Index x = 0; x < S.size(); ++x)
    for (Index y = x + 1; y < S.size(); ++y)
      worst = std::max(worst, std::abs(D(T, f[x], f[y]) - D(S, x, y)));
  return worst;
}

double image_net_radius(const MetricMeasureSpace& T, const std::vector<Index>& f) {
  PointSet image(f.begin(), f.end());
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  return covering_radius(T, image);
}

PointSet farthest_point_order(const MetricMeasureSpace& s, Index start) {
  const std::size_t n = s.size();
  PointSet order{start};
  std::vector<double> gap(n);
  std::vector<char> used(n, 0);
  used[start] = 1;
  for (Index z = 0; z < n; ++z) gap[z] = D(s, start, z);
  while (order.size() < n) {
    Index far = n;
    for (Index z = 0; z < n; ++z)
      if (!used[z] && (far == n || gap[z] > gap[far])) far = z;
    used[far] = 1;
    order.push_back(far);
    for (Index z = 0; z < n; ++z) gap[z] = std::min(gap[z], D(s, far, z));
  }
  return order;
}

// One direction of the search.
std::vector<Index> search_map(const MetricMeasureSpace& S, const MetricMeasureSpace& T,
                              const IsometrySearchOptions& opt) {
  const std::size_t n = S.size(), m = T.size();
  const PointSet order = farthest_point_order(S, S.basepoint);
  std::vector<Index> f(n, 0);
  f[S.basepoint] = T.basepoint;
  std::vector<Index> assigned{S.basepoint};

  std::vector<Index> anchors;
  std::vector<std::pair<double, Index>> near;
  for (std::size_t step = 1; step < n; ++step) {
    const Index x = order[step];
    anchors.assign(order.begin(), order.begin() + static_cast<long>(std::min(step, opt.anchors)));
    near.clear();
    for (Index a : assigned) near.push_back({D(S, x, a), a});
    const std::size_t k = std::min(opt.anchors, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<long>(k), near.end());
    for (std::size_t i = 0; i < k; ++i) anchors.push_back(near[i].second);

    Index best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (Index y = 0; y < m; ++y) {
      double cost = 0.0;
      for (Index a : anchors) {
        cost = std::max(cost, std::abs(D(T, y, f[a]) - D(S, x, a)));
        if (cost >= best_cost) break;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = y;
      }
    }
    f[x] = best;
    assigned.push_back(x);
  }
  return f;
}

// Greedy point moves on the worst row until nothing improves or the budget
// runs out.
void improve_map(const MetricMeasureSpace& S, const MetricMeasureSpace& T,
                 const IsometrySearchOptions& opt, std::vector<Index>& f) {
  const std::size_t n = S.size(), m = T.size();

  // Local improvement on the worst row. The defect matrix is symmetric, so
  // lowering one row's maximum never raises the global maximum.
  auto entry = [&](Index x, Index a, Index fx) { return std::abs(D(T, fx, f[a]) - D(S, x, a)); };
  std::vector<double> row(n, 0.0);
  for (Index x = 0; x < n; ++x)
    for (Index a = 0; a < n; ++a) row[x] = std::max(row[x], entry(x, a, f[x]));

  const std::size_t budget = opt.budget_factor * n;
  std::vector<std::pair<double, Index>> cand;
  for (std::size_t it = 0; it < budget; ++it) {
    Index worst = static_cast<Index>(std::max_element(row.begin(), row.end()) - row.begin());
    if (row[worst] == 0.0) break;
    Index partner = worst;
    for (Index a = 0; a < n; ++a)
      if (entry(worst, a, f[worst]) == row[worst]) {
        partner = a;
        break;
      }
    bool moved = false;
    for (Index u : {worst, partner}) {
      if (u == S.basepoint) continue;
      cand.clear();
      for (Index y = 0; y < m; ++y) cand.push_back({D(T, f[u], y), y});
      const std::size_t c = std::min(opt.candidates, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(c), cand.end());
      double best = row[u];
      Index best_y = f[u];
      for (std::size_t i = 0; i < c; ++i) {
        const Index y = cand[i].second;
        if (y == f[u]) continue;
        double r = 0.0;
        for (Index a = 0; a < n && r < best; ++a)
          if (a != u) r = std::max(r, entry(u, a, y));
        if (r < best) {
          best = r;
          best_y = y;
        }
      }
      if (best_y != f[u]) {
        const Index old = f[u];
        f[u] = best_y;
        row[u] = 0.0;
        for (Index a = 0; a < n; ++a) {
          if (a == u) continue;
          double before = std::abs(D(T, old, f[a]) - D(S, u, a));
          double after = entry(u, a, best_y);
          row[u] = std::max(row[u], after);
          if (after >= row[a]) {
            row[a] = after;
          } else if (before == row[a]) {
            row[a] = 0.0;
            for (Index b = 0; b < n; ++b) row[a] = std::max(row[a], entry(a, b, f[a]));
          }
        }
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
}

// g(y) = a source point whose image is nearest to y; basepoints kept.
std::vector<Index> nearest_preimage(const MetricMeasureSpace& S, const MetricMeasureSpace& T,
                                    const std::vector<Index>& f) {
  std::vector<Index> g(T.size(), S.basepoint);
  for (Index y = 0; y < T.size(); ++y) {
    double best = std::numeric_limits<double>::infinity();
    for (Index x = 0; x < S.size(); ++x) {
      const double d = D(T, y, f[x]);
      if (d < best) {
        best = d;
        g[y] = x;
      }
    }
  }
  g[T.basepoint] = S.basepoint;
  return g;
}

}  // namespace

void measure_isometry(const MetricMeasureSpace& S, const MetricMeasureSpace& T, ApproxIsometry& iso) {
  require(iso.f.size() == S.size() && iso.g.size() == T.size(), "isometry map sizes mismatch");
  iso.distortion_f = map_distortion(S, T, iso.f);
  iso.distortion_g = map_distortion(T, S, iso.g);
  iso.net_radius = image_net_radius(T, iso.f);
  iso.net_radius_g = image_net_radius(S, iso.g);
  iso.roundtrip_source = 0.0;
  for (Index x = 0; x < S.size(); ++x)
    iso.roundtrip_source = std::max(iso.roundtrip_source, D(S, x, iso.g[iso.f[x]]));
  iso.roundtrip_target = 0.0;
  for (Index y = 0; y < T.size(); ++y)
    iso.roundtrip_target = std::max(iso.roundtrip_target, D(T, y, iso.f[iso.g[y]]));
  iso.basepoint_preserved = iso.f[S.basepoint] == T.basepoint && iso.g[T.basepoint] == S.basepoint;
  iso.epsilon = std::max({iso.distortion_f, iso.distortion_g, iso.net_radius / 2.0,
                          iso.net_radius_g / 2.0, iso.roundtrip_source, iso.roundtrip_target});
}

ApproxIsometry build_approx_isometry(const MetricMeasureSpace& source,
                                     const MetricMeasureSpace& target,
                                     const IsometrySearchOptions& opt) {
  require(source.size() > 0 && target.size() > 0, "isometry between empty spaces");
  std::vector<Index> f = search_map(source, target, opt);
  improve_map(source, target, opt, f);
  std::vector<Index> g = search_map(target, source, opt);
  improve_map(target, source, opt, g);
  // Quasi-inverses of each searched map compete with the other direction.
  std::vector<Index> g2 = nearest_preimage(source, target, f);
  improve_map(target, source, opt, g2);
  std::vector<Index> f2 = nearest_preimage(target, source, g);
  improve_map(source, target, opt, f2);

  ApproxIsometry best;
  bool have = false;
  for (auto [fa, ga] : {std::pair{&f, &g}, std::pair{&f, &g2}, std::pair{&f2, &g}}) {
    ApproxIsometry iso;
    iso.f = *fa;
    iso.g = *ga;
    measure_isometry(source, target, iso);
    if (!have || iso.epsilon < best.epsilon) best = std::move(iso);
    have = true;
  }
  return best;
}

namespace {

std::vector<Index> nearest_in_plane(const std::vector<Point2>& from, const std::vector<Point2>& to) {
  std::vector<Index> out(from.size(), 0);
  for (Index i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < to.size(); ++j) {
      double dx = from[i].x - to[j].x, dy = from[i].y - to[j].y;
      double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

}  // namespace

ApproxIsometry isometry_from_embedding(const MetricMeasureSpace& source,
                                       const std::vector<Point2>& source_xy,
                                       const MetricMeasureSpace& target,
                                       const std::vector<Point2>& target_xy) {
  require(source_xy.size() == source.size() && target_xy.size() == target.size(),
          "embedding needs coordinates for every point");
  ApproxIsometry iso;
  iso.f = nearest_in_plane(source_xy, target_xy);
  iso.g = nearest_in_plane(target_xy, source_xy);
  iso.f[source.basepoint] = target.basepoint;
  iso.g[target.basepoint] = source.basepoint;
  measure_isometry(source, target, iso);
  return iso;
}

ApproxIsometry identity_isometry(const MetricMeasureSpace& s) {
  ApproxIsometry iso;
  iso.f.resize(s.size());
  std::iota(iso.f.begin(), iso.f.end(), Index{0});
  iso.g = iso.f;
  measure_isometry(s, s, iso);
  return iso;
}

double correspondence_distortion(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                                 const ApproxIsometry& iso) {
  std::vector<std::pair<Index, Index>> rel;
  for (Index x = 0; x < a.size(); ++x) rel.push_back({x, iso.f[x]});
  for (Index y = 0; y < b.size(); ++y) rel.push_back({iso.g[y], y});
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < rel.size(); ++i)
    for (std::size_t j = i + 1; j < rel.size(); ++j)
      worst = std::max(worst, std::abs(D(a, rel[i].first, rel[j].first) -
                                       D(b, rel[i].second, rel[j].second)));
  return worst;
}

double gh_upper_bound(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                      const IsometrySearchOptions& opt) {
  ApproxIsometry iso = build_approx_isometry(a, b, opt);
  return 0.5 * correspondence_distortion(a, b, iso);
}

void write_isometry(std::ostream& out, const MetricMeasureSpace& source,
                    const MetricMeasureSpace& target, const ApproxIsometry& iso) {
  out << "# {\"epsilon\":" << format_double(iso.epsilon)
      << ",\"distortion_f\":" << format_double(iso.distortion_f)
      << ",\"distortion_g\":" << format_double(iso.distortion_g)
      << ",\"net_radius\":" << format_double(iso.net_radius)
      << ",\"roundtrip_source\":" << format_double(iso.roundtrip_source)
      << ",\"roundtrip_target\":" << format_double(iso.roundtrip_target)
      << ",\"basepoint_preserved\":" << (iso.basepoint_preserved ? "true" : "false") << "}\n";
  out << "source_id,target_id\n";
  for (Index x = 0; x < source.size(); ++x) out << source.ids[x] << ',' << target.ids[iso.f[x]] << '\n';
}

PushforwardMeasure pushforward(const std::vector<double>& source_measure,
                               const std::vector<Index>& f, std::size_t target_size,
                               const PointSet& restriction) {
  PushforwardMeasure pm;
  pm.mass.assign(target_size, 0.0);
  for (Index x : restriction) {
    require(x < f.size() && x < source_measure.size(), "pushforward: restriction out of range");
    require(f[x] < target_size, "pushforward: map leaves the target");
    pm.mass[f[x]] += source_measure[x];
    pm.restricted_mass += source_measure[x];
  }
  return pm;
}

std::vector<double> weak_gap(const std::vector<double>& mu, const std::vector<double>& nu,
                             const std::vector<TestFunction>& tests) {
  require(mu.size() == nu.size(), "weak gap: measure sizes differ");
  std::vector<double> gaps;
  for (const TestFunction& t : tests) {
    require(t.size() == mu.size(), "weak gap: test function size mismatch");
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      a += t[i] * mu[i];
      b += t[i] * nu[i];
    }
    gaps.push_back(std::abs(a - b));
  }
  return gaps;
}

std::vector<TestFunction> default_weak_tests(const MetricMeasureSpace& target, double R) {
  const std::size_t n = target.size();
  std::vector<TestFunction> tests(5, TestFunction(n));
  for (Index y = 0; y < n; ++y) {
    const double d = D(target, target.basepoint, y);
    tests[0][y] = 1.0;
    tests[1][y] = std::min(d, R);
    for (int k = 1; k <= 3; ++k)
      tests[1 + k][y] = std::max(0.0, 1.0 - std::abs(d - k * R / 4.0) / (R / 4.0));
  }
  return tests;
}

std::vector<std::string> default_weak_test_names() {
  return {"one", "dist_min_R", "tent_R/4", "tent_R/2", "tent_3R/4"};
}

}  // namespace hkelab
