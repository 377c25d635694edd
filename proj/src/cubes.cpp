#include "hkelab/cubes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hkelab {

namespace {

PointSet farthest_point_centers(const MetricMeasureSpace& s, double sep) {
  const std::size_t n = s.size();
  PointSet centers{0};
  std::vector<double> gap(n);
  for (Index z = 0; z < n; ++z) gap[z] = s.dist(0, static_cast<Eigen::Index>(z));
  for (;;) {
    Index far = 0;
    for (Index z = 1; z < n; ++z)
      if (gap[z] > gap[far]) far = z;  // strict: lowest id wins ties
    if (gap[far] <= sep) break;
    centers.push_back(far);
    for (Index z = 0; z < n; ++z)
      gap[z] = std::min(gap[z], s.dist(static_cast<Eigen::Index>(far), static_cast<Eigen::Index>(z)));
  }
  return centers;
}

}  // namespace

CubeDecomposition christ_cubes(const MetricMeasureSpace& s, double delta, int depth) {
  require(delta > 0.0 && delta < 1.0, "cube ratio delta must lie in (0,1)");
  require(depth >= 1, "cube depth must be >= 1");
  std::vector<PointSet> centers;
  for (int k = 1; k <= depth; ++k) centers.push_back(farthest_point_centers(s, std::pow(delta, k)));
  return christ_cubes(s, delta, centers);
}

CubeDecomposition christ_cubes(const MetricMeasureSpace& s, double delta,
                               const std::vector<PointSet>& centers_per_level) {
  require(delta > 0.0 && delta < 1.0, "cube ratio delta must lie in (0,1)");
  require(!centers_per_level.empty(), "cube decomposition needs at least one level");
  CubeDecomposition out;
  out.delta = delta;
  double a0 = std::numeric_limits<double>::infinity();
  double a1 = 0.0;
  const std::size_t n = s.size();
  for (std::size_t lv = 0; lv < centers_per_level.size(); ++lv) {
    CubeLevel level;
    level.k = static_cast<int>(lv) + 1;
    level.scale = std::pow(delta, level.k);
    level.centers = centers_per_level[lv];
    require(!level.centers.empty(), "cube level without centres");
    std::vector<Index> owner(n);
    for (Index y = 0; y < n; ++y) {
      Index best = 0;
      for (Index j = 1; j < level.centers.size(); ++j) {
        double dj = s.dist(static_cast<Eigen::Index>(level.centers[j]), static_cast<Eigen::Index>(y));
        double db = s.dist(static_cast<Eigen::Index>(level.centers[best]), static_cast<Eigen::Index>(y));
        if (dj < db || (dj == db && level.centers[j] < level.centers[best])) best = j;
      }
      owner[y] = best;
    }
    level.cubes.assign(level.centers.size(), {});
    for (Index y = 0; y < n; ++y) level.cubes[owner[y]].push_back(y);
    for (Index j = 0; j < level.centers.size(); ++j) {
      const auto z = static_cast<Eigen::Index>(level.centers[j]);
      for (Index y = 0; y < n; ++y) {
        const double d = s.dist(z, static_cast<Eigen::Index>(y));
        // The outer ball is open and ball() shaves a roundoff slack off its
        // radius, so a1 sits clear of the in-cube maximum by more than that.
        if (owner[y] == j) {
          if (d > 0.0) a1 = std::max(a1, (d * (1.0 + 1e-9) + 1e-9) / level.scale);
        } else {
          a0 = std::min(a0, d / level.scale);
        }
      }
    }
    out.levels.push_back(std::move(level));
  }
  if (a1 == 0.0) a1 = 1.0;  // every cube is a single point
  if (!std::isfinite(a0)) a0 = a1;  // one cube per level: no outside constraint
  out.a0 = std::min(a0, a1);
  out.a1 = a1;
  return out;
}

CubeVerification verify_cubes(const MetricMeasureSpace& s, const CubeDecomposition& c) {
  CubeVerification v;
  const std::size_t n = s.size();
  for (const CubeLevel& level : c.levels) {
    std::vector<int> hits(n, 0);
    for (const PointSet& q : level.cubes)
      for (Index y : q) ++hits[y];
    for (Index y = 0; y < n; ++y)
      if (hits[y] != 1) {
        v.partition = false;
        v.detail = "level " + std::to_string(level.k) + ": point " + s.ids[y] + " covered " +
                   std::to_string(hits[y]) + " times";
      }
    for (std::size_t j = 0; j < level.cubes.size(); ++j) {
      const Index z = level.centers[j];
      PointSet inner = ball(s, z, c.a0 * level.scale);
      PointSet outer = ball(s, z, c.a1 * level.scale);
      const PointSet& q = level.cubes[j];
      if (!std::includes(q.begin(), q.end(), inner.begin(), inner.end()) ||
          !std::includes(outer.begin(), outer.end(), q.begin(), q.end())) {
        v.sandwich = false;
        v.detail = "level " + std::to_string(level.k) + ": sandwich fails at centre " + s.ids[z];
      }
    }
  }
  return v;
}

}  // namespace hkelab
