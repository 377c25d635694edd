#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hkelab/graph.hpp"

namespace hkelab {

/// Finite metric measure space with a distinguished basepoint.
///
/// `dist` is a dense symmetric matrix. For the generated models this is the
/// all-pairs shortest-path metric of a WeightedGraph.
struct MetricMeasureSpace {
  std::vector<std::string> ids;
  Eigen::MatrixXd dist;
  std::vector<double> measure;
  Index basepoint = 0;

  std::size_t size() const noexcept { return ids.size(); }
};

/// All-pairs Dijkstra. Throws (listing a component) if g is disconnected.
MetricMeasureSpace geodesic_space(const WeightedGraph& g, Index basepoint = 0);

/// Builds a space from an explicit matrix; validates shape, symmetry, zero
/// diagonal and positive measure. The triangle inequality is left to
/// check_triangle() because of its cost.
MetricMeasureSpace make_space(std::vector<std::string> ids, Eigen::MatrixXd dist,
                              std::vector<double> measure, Index basepoint = 0);

/// Geodesic distances are sums of edge lengths, so a vertex at distance
/// exactly r can come out a few ulps either side. Ball membership treats
/// |d - r| <= kBallRelTol * max(1, r) as d = r.
inline constexpr double kBallRelTol = 1e-12;
double ball_slack(double r);

/// Open ball {z : d(x,z) < r}, sorted.
PointSet ball(const MetricMeasureSpace& s, Index center, double r);
/// Closed ball {z : d(x,z) <= r}, sorted.
PointSet closed_ball(const MetricMeasureSpace& s, Index center, double r);
double mass(const MetricMeasureSpace& s, const PointSet& pts);

/// Greedy farthest-point net. Starts at `seed % |X|` and keeps adding the
/// point farthest from the current net while that distance exceeds eps.
/// Result covers at radius eps and is eps-separated, sorted by id index.
PointSet epsilon_net(const MetricMeasureSpace& s, double eps, std::uint64_t seed);

double diameter(const MetricMeasureSpace& s);

/// |diam_n - diam_last| for every member.
std::vector<double> diameter_sequence_gap(const std::vector<MetricMeasureSpace>& seq);

struct TriangleCheck {
  bool ok = true;
  bool exhaustive = true;
  std::size_t triples = 0;
  double worst_violation = 0.0;  // max of d(x,z) - d(x,y) - d(y,z)
  Index x = 0, y = 0, z = 0;
};

/// Exhaustive for |X| <= 300, else `samples` random triples drawn from `seed`.
TriangleCheck check_triangle(const MetricMeasureSpace& s, double tol = 1e-12,
                             std::size_t samples = 100000, std::uint64_t seed = 1);

/// Maximum over x of d(x, nearest point of `net`).
double covering_radius(const MetricMeasureSpace& s, const PointSet& net);

}  // namespace hkelab
