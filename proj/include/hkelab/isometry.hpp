#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hkelab/graph.hpp"
#include "hkelab/metric_space.hpp"

namespace hkelab {

/// Pointed approximate isometry f: source -> target with quasi-inverse g.
/// Every measured field is recomputable from the two map tables.
struct ApproxIsometry {
  std::vector<Index> f;  // source index -> target index
  std::vector<Index> g;  // target index -> source index
  double distortion_f = 0.0;       // sup |d_T(fx, fy) - d_S(x, y)|
  double distortion_g = 0.0;
  double net_radius = 0.0;         // covering radius of f(source) in target
  double net_radius_g = 0.0;       // covering radius of g(target) in source
  double roundtrip_source = 0.0;   // sup d_S(x, g f x)
  double roundtrip_target = 0.0;   // sup d_T(y, f g y)
  double epsilon = 0.0;
  bool basepoint_preserved = false;
};

/// Fills every measured field of `iso` from its maps.
void measure_isometry(const MetricMeasureSpace& source, const MetricMeasureSpace& target,
                      ApproxIsometry& iso);

struct IsometrySearchOptions {
  std::size_t anchors = 16;      // far anchors and near anchors each
  std::size_t candidates = 64;   // local-move neighbourhood in the target
  std::size_t budget_factor = 10;
};

/// Greedy farthest-point-order assignment followed by local reassignment of
/// the worst pair, in both directions. Deterministic.
ApproxIsometry build_approx_isometry(const MetricMeasureSpace& source,
                                     const MetricMeasureSpace& target,
                                     const IsometrySearchOptions& opt = {});

/// Nearest-point maps for two spaces embedded in the same plane (ties to the
/// lowest index); basepoints are mapped to each other.
ApproxIsometry isometry_from_embedding(const MetricMeasureSpace& source,
                                       const std::vector<Point2>& source_xy,
                                       const MetricMeasureSpace& target,
                                       const std::vector<Point2>& target_xy);

ApproxIsometry identity_isometry(const MetricMeasureSpace& s);

/// Half the distortion of the correspondence graph(f) u graph(g)^T found by
/// the search; an upper bound for d_GH.
double gh_upper_bound(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                      const IsometrySearchOptions& opt = {});
double correspondence_distortion(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                                 const ApproxIsometry& iso);

/// CSV `source_id,target_id` preceded by a one-line JSON header comment.
void write_isometry(std::ostream& out, const MetricMeasureSpace& source,
                    const MetricMeasureSpace& target, const ApproxIsometry& iso);

struct PushforwardMeasure {
  std::vector<double> mass;      // per target point
  double restricted_mass = 0.0;  // source mass of the restriction
};

/// f_#(m|_ball): mass at y is the source mass of f^{-1}(y) within `restriction`.
PushforwardMeasure pushforward(const std::vector<double>& source_measure,
                               const std::vector<Index>& f, std::size_t target_size,
                               const PointSet& restriction);

using TestFunction = std::vector<double>;  // values on target points

/// gap_i = |int t_i dmu - int t_i dnu|.
std::vector<double> weak_gap(const std::vector<double>& mu, const std::vector<double>& nu,
                             const std::vector<TestFunction>& tests);

/// 1, d(., p) ^ R, and radial tents of half-width R/4 at radii R/4, R/2, 3R/4.
std::vector<TestFunction> default_weak_tests(const MetricMeasureSpace& target, double R);
std::vector<std::string> default_weak_test_names();

}  // namespace hkelab
