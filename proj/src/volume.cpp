#include "hkelab/volume.hpp"

#include <algorithm>
#include <cmath>

namespace hkelab {

double annulus_gamma(double cv) { return std::log(1.0 + std::pow(cv, -4.0)) / std::log(3.0); }

RegularityReport volume_regularity(const MetricMeasureSpace& s, const VolumeProfile& V,
                                   const std::vector<double>& r_grid, const PointSet& centers) {
  return volume_regularity(s, s.measure, V, r_grid, centers);
}

RegularityReport volume_regularity(const MetricMeasureSpace& s,
                                   const std::vector<double>& measure, const VolumeProfile& V,
                                   const std::vector<double>& r_grid, const PointSet& centers) {
  require(measure.size() == s.size(), "measure size mismatch");
  RegularityReport rep;
  PointSet xs = centers;
  if (xs.empty())
    for (Index x = 0; x < s.size(); ++x)
      if (measure[x] > 0.0) xs.push_back(x);
  for (Index x : xs) {
    const auto col = s.dist.col(static_cast<Eigen::Index>(x));
    for (double r : r_grid) {
      require(r > 0.0, "radius grid must be positive");
      double m = 0.0;
      const double cut = r - ball_slack(r);
      for (Index z = 0; z < s.size(); ++z)
        if (col(static_cast<Eigen::Index>(z)) < cut) m += measure[z];
      double v = V(r);
      double c = (m > 0.0) ? std::max(m / v, v / m) : INFINITY;
      if (c > rep.measured_cv) {
        rep.measured_cv = c;
        rep.witness_x = x;
        rep.witness_r = r;
      }
    }
  }
  rep.gamma = annulus_gamma(rep.measured_cv);
  rep.pass = rep.measured_cv <= V.cv;
  return rep;
}

AnnulusResult annulus_ratio(const MetricMeasureSpace& s, Index z, double r, double R, double cv) {
  require(z < s.size(), "annulus center out of range");
  require(r >= 0.0 && r < R, "annulus needs 0 <= r < R");
  double outer = 0.0, shell = 0.0;
  const auto col = s.dist.col(static_cast<Eigen::Index>(z));
  for (Index y = 0; y < s.size(); ++y) {
    double d = col(static_cast<Eigen::Index>(y));
    if (d < R - ball_slack(R)) {
      outer += s.measure[y];
      if (d > r + ball_slack(r)) shell += s.measure[y];
    }
  }
  if (!(outer > 0.0)) fail(ErrorCode::invalid_argument, "annulus: empty outer ball");
  AnnulusResult res;
  res.ratio = shell / outer;
  const double g = annulus_gamma(cv);
  res.bound = std::pow(6.0, g) * std::pow((R - r) / R, g);
  res.exceeds = res.ratio > res.bound;
  return res;
}

}  // namespace hkelab
