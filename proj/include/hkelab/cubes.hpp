#pragma once

#include <string>
#include <vector>

#include "hkelab/metric_space.hpp"

namespace hkelab {

struct CubeLevel {
  int k = 0;
  double scale = 0.0;            // delta^k
  PointSet centers;              // z_{k,j}
  std::vector<PointSet> cubes;   // Q_{k,j}, sorted
};

struct CubeDecomposition {
  double delta = 0.5;
  double a0 = 0.0;
  double a1 = 0.0;
  std::vector<CubeLevel> levels;  // k = 1 .. depth
};

/// Levels k = 1..depth. Centres are a farthest-point net at separation
/// delta^k started from the lowest id; cubes are nearest-centre cells with
/// ties to the lowest centre. a0 and a1 are the tightest constants of the
/// ball sandwich for these centres (a1 nudged above the in-cube maximum
/// because balls are open).
CubeDecomposition christ_cubes(const MetricMeasureSpace& s, double delta, int depth);

/// Same, with caller-supplied centres per level (must be non-empty).
CubeDecomposition christ_cubes(const MetricMeasureSpace& s, double delta,
                               const std::vector<PointSet>& centers_per_level);

struct CubeVerification {
  bool partition = true;  // per level: disjoint and covering
  bool sandwich = true;   // B(z, a0 d^k) in Q in B(z, a1 d^k)
  std::string detail;
  bool ok() const { return partition && sandwich; }
};

/// Exact set-algebra check of a decomposition against its own constants.
CubeVerification verify_cubes(const MetricMeasureSpace& s, const CubeDecomposition& c);

}  // namespace hkelab
