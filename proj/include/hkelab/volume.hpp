#pragma once

#include <vector>

#include "hkelab/metric_space.hpp"
#include "hkelab/scale.hpp"

namespace hkelab {

struct RegularityReport {
  double measured_cv = 1.0;
  double gamma = 0.0;  // annulus exponent log(1 + Cv^-4) / log 3
  Index witness_x = 0;
  double witness_r = 0.0;
  bool pass = false;
};

double annulus_gamma(double cv);

/// Smallest C with C^{-1} V(r) <= m(B(x,r)) <= C V(r) over the sampled (x, r).
/// `centers` empty means every point. Points with zero mass are allowed in
/// `measure_override` (pushforward estimates) but never used as centers.
RegularityReport volume_regularity(const MetricMeasureSpace& s, const VolumeProfile& V,
                                   const std::vector<double>& r_grid,
                                   const PointSet& centers = {});
RegularityReport volume_regularity(const MetricMeasureSpace& s,
                                   const std::vector<double>& measure_override,
                                   const VolumeProfile& V, const std::vector<double>& r_grid,
                                   const PointSet& centers = {});

struct AnnulusResult {
  double ratio = 0.0;
  double bound = 0.0;
  bool exceeds = false;
};

/// mu(B(z,R) \ closed B(z,r)) / mu(B(z,R)) against 6^gamma ((R-r)/R)^gamma.
AnnulusResult annulus_ratio(const MetricMeasureSpace& s, Index z, double r, double R,
                            double cv);

}  // namespace hkelab
