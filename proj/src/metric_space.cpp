#include "hkelab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>

namespace hkelab {

namespace {

void dijkstra_row(const WeightedGraph& g, Index src, double* out) {
  const auto& adj = g.adjacency();
  const std::size_t n = g.vertex_count();
  std::fill(out, out + n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  out[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > out[v]) continue;
    for (const Neighbor& nb : adj[v]) {
      double nd = d + nb.length;
      if (nd < out[nb.vertex]) {
        out[nb.vertex] = nd;
        pq.push({nd, nb.vertex});
      }
    }
  }
}

}  // namespace

MetricMeasureSpace geodesic_space(const WeightedGraph& g, Index basepoint) {
  g.require_connected();
  require(basepoint < g.vertex_count(), "basepoint out of range");
  const std::size_t n = g.vertex_count();
  MetricMeasureSpace s;
  s.ids = g.ids();
  s.measure = g.measure();
  s.basepoint = basepoint;
  s.dist.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Column-major: column i is the Dijkstra row from i. Symmetrize afterwards so
  // d(x,y) and d(y,x) agree bit for bit even if path sums differ in rounding.
  for (Index i = 0; i < n; ++i) dijkstra_row(g, i, s.dist.col(static_cast<Eigen::Index>(i)).data());
  for (Eigen::Index i = 0; i < s.dist.rows(); ++i)
    for (Eigen::Index j = i + 1; j < s.dist.cols(); ++j) {
      double v = std::min(s.dist(i, j), s.dist(j, i));
      s.dist(i, j) = v;
      s.dist(j, i) = v;
    }
  return s;
}

MetricMeasureSpace make_space(std::vector<std::string> ids, Eigen::MatrixXd dist,
                              std::vector<double> measure, Index basepoint) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (dist.rows() != n || dist.cols() != n || measure.size() != ids.size())
    fail(ErrorCode::validation, "distance matrix / measure size mismatch");
  if (n == 0) fail(ErrorCode::validation, "empty space");
  require(basepoint < ids.size(), "basepoint out of range");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0) fail(ErrorCode::validation, "nonzero diagonal in distance matrix");
    if (!(measure[static_cast<std::size_t>(i)] > 0.0))
      fail(ErrorCode::validation, "measure must be positive");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(dist(i, j) >= 0.0) || !std::isfinite(dist(i, j)))
        fail(ErrorCode::validation, "distances must be finite and nonnegative");
      if (dist(i, j) != dist(j, i)) fail(ErrorCode::validation, "distance matrix not symmetric");
    }
  }
  return MetricMeasureSpace{std::move(ids), std::move(dist), std::move(measure), basepoint};
}

double ball_slack(double r) { return kBallRelTol * std::max(1.0, std::abs(r)); }

PointSet ball(const MetricMeasureSpace& s, Index center, double r) {
  require(center < s.size(), "ball center out of range");
  PointSet out;
  const double cut = r - ball_slack(r);
  for (Index z = 0; z < s.size(); ++z)
    if (s.dist(static_cast<Eigen::Index>(center), static_cast<Eigen::Index>(z)) < cut) out.push_back(z);
  return out;
}

PointSet closed_ball(const MetricMeasureSpace& s, Index center, double r) {
  require(center < s.size(), "ball center out of range");
  PointSet out;
  const double cut = r + ball_slack(r);
  for (Index z = 0; z < s.size(); ++z)
    if (s.dist(static_cast<Eigen::Index>(center), static_cast<Eigen::Index>(z)) <= cut) out.push_back(z);
  return out;
}

double mass(const MetricMeasureSpace& s, const PointSet& pts) {
  double m = 0.0;
  for (Index p : pts) m += s.measure[p];
  return m;
}

PointSet epsilon_net(const MetricMeasureSpace& s, double eps, std::uint64_t seed) {
  require(eps > 0.0, "epsilon must be positive");
  const std::size_t n = s.size();
  require(n > 0, "empty space");
  Index start = static_cast<Index>(seed % n);
  PointSet net{start};
  std::vector<double> gap(n);
  for (Index z = 0; z < n; ++z) gap[z] = s.dist(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(z));
  for (;;) {
    Index far = 0;
    for (Index z = 1; z < n; ++z)
      if (gap[z] > gap[far]) far = z;
    if (gap[far] <= eps) break;
    net.push_back(far);
    for (Index z = 0; z < n; ++z)
      gap[z] = std::min(gap[z], s.dist(static_cast<Eigen::Index>(far), static_cast<Eigen::Index>(z)));
  }
  std::sort(net.begin(), net.end());
  return net;
}

double diameter(const MetricMeasureSpace& s) {
  return s.size() == 0 ? 0.0 : s.dist.maxCoeff();
}

std::vector<double> diameter_sequence_gap(const std::vector<MetricMeasureSpace>& seq) {
  std::vector<double> out;
  if (seq.empty()) return out;
  const double last = diameter(seq.back());
  for (const auto& s : seq) out.push_back(std::abs(diameter(s) - last));
  return out;
}

TriangleCheck check_triangle(const MetricMeasureSpace& s, double tol, std::size_t samples,
                             std::uint64_t seed) {
  TriangleCheck rep;
  const auto n = static_cast<Eigen::Index>(s.size());
  auto visit = [&](Eigen::Index x, Eigen::Index y, Eigen::Index z) {
    double v = s.dist(x, z) - s.dist(x, y) - s.dist(y, z);
    ++rep.triples;
    if (v > rep.worst_violation) {
      rep.worst_violation = v;
      rep.x = static_cast<Index>(x);
      rep.y = static_cast<Index>(y);
      rep.z = static_cast<Index>(z);
    }
  };
  if (n <= 300) {
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        for (Eigen::Index z = x + 1; z < n; ++z) visit(x, y, z);
  } else {
    rep.exhaustive = false;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (std::size_t k = 0; k < samples; ++k) {
      Eigen::Index x = pick(rng), y = pick(rng), z = pick(rng);
      visit(x, y, z);
    }
  }
  rep.ok = rep.worst_violation <= tol;
  return rep;
}

double covering_radius(const MetricMeasureSpace& s, const PointSet& net) {
  double worst = 0.0;
  for (Index z = 0; z < s.size(); ++z) {
    double best = std::numeric_limits<double>::infinity();
    for (Index p : net)
      best = std::min(best, s.dist(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(z)));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace hkelab
