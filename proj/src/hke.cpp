#include "hkelab/hke.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace hkelab {

double FitReport::get(const std::string& name) const {
  for (const auto& [k, v] : constants)
    if (k == name) return v;
  fail(ErrorCode::invalid_argument, "fit report has no constant '" + name + "'");
}

void FitReport::set(const std::string& name, double v) {
  for (auto& [k, old] : constants)
    if (k == name) {
      old = v;
      return;
    }
  constants.emplace_back(name, v);
}

std::vector<double> bulk_t_grid(const ScaleFunction& psi, double mesh, double window, std::size_t n) {
  const double lo = psi(2.0 * mesh), hi = psi(window / 4.0);
  if (!(lo < hi))
    fail(ErrorCode::invalid_argument, "bulk regime is empty: Psi(2 mesh) >= Psi(window/4)");
  return log_grid(lo, hi, n);
}

namespace {

class PhiCache {
 public:
  explicit PhiCache(const ScaleFunction& psi) : psi_(psi) {}
  double operator()(double s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    double v = phi_transform(psi_, s);
    cache_.emplace(s, v);
    return v;
  }

 private:
  ScaleFunction psi_;
  std::map<double, double> cache_;
};

}  // namespace

FitReport hke_bounds_check(const MetricMeasureSpace& s, const SpectralData& spec,
                           const PiecewisePower& V, const ScaleFunction& psi,
                           const std::vector<double>& t_grid, const HkeOptions& opt) {
  FitReport rep;
  PhiCache phi(psi);
  const PointSet& I = spec.interior;
  double c1_up = 0.0, c1_low = 0.0;
  Witness w_up{"upper", 0, 0, 0, 0}, w_low{"lower", 0, 0, 0, 0};
  struct Sample {
    double t, log_pv, tphi;
  };
  std::vector<Sample> tails;
  for (double t : t_grid) {
    const Eigen::MatrixXd P = heat_kernel(spec, t);
    const double r = psi.inverse(t);
    const double v = V(r);
    const double cut = opt.floor * P.maxCoeff();
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const double p = P(i, j);
        const double d = s.dist(static_cast<Eigen::Index>(I[static_cast<std::size_t>(i)]),
                                static_cast<Eigen::Index>(I[static_cast<std::size_t>(j)]));
        if (d <= opt.delta * r) {
          double low = p > 0.0 ? 1.0 / (p * v) : INFINITY;
          if (low > c1_low) {
            c1_low = low;
            w_low = {"lower", t, I[static_cast<std::size_t>(i)], I[static_cast<std::size_t>(j)], low};
          }
        }
        if (p < cut || p <= 0.0) continue;
        const double tphi = t * phi(opt.c3 * d / t);
        const double up = p * v * std::exp(opt.c2 * tphi);
        if (up > c1_up) {
          c1_up = up;
          w_up = {"upper", t, I[static_cast<std::size_t>(i)], I[static_cast<std::size_t>(j)], up};
        }
        if (tphi > 1e-12) tails.push_back({t, std::log(p * v), tphi});
      }
  }
  const double c1 = std::max(c1_up, c1_low);
  double c2_max = INFINITY;
  for (const Sample& sm : tails) c2_max = std::min(c2_max, (std::log(c1) - sm.log_pv) / sm.tphi);
  rep.set("C_1", c1);
  rep.set("C_1_upper", c1_up);
  rep.set("C_1_lower", c1_low);
  rep.set("c_2", opt.c2);
  rep.set("c_3", opt.c3);
  rep.set("delta", opt.delta);
  rep.set("c_2_admissible", std::isfinite(c2_max) ? c2_max : -1.0);
  rep.witnesses = {w_up, w_low};
  rep.grid = {{"t_min", t_grid.front()}, {"t_max", t_grid.back()},
              {"t_points", static_cast<double>(t_grid.size())}, {"c1_budget", opt.c1_budget}};
  rep.pass = std::isfinite(c1) && c1 <= opt.c1_budget;
  return rep;
}

FitReport weyl_check(const SpectralData& spec, const ScaleFunction& psi, double R) {
  require(R > 0.0, "Weyl check needs R > 0");
  FitReport rep;
  double best = 0.0;
  Index arg = 0;
  for (Eigen::Index j = 0; j < spec.values.size(); ++j) {
    const double v = spec.values(j) * psi(R / static_cast<double>(j + 1));
    rep.profile.push_back(v);
    if (v > best) {
      best = v;
      arg = static_cast<Index>(j + 1);
    }
  }
  rep.set("C_weyl", best);
  rep.witnesses = {{"argmax_j", 0.0, arg, arg, best}};
  rep.grid = {{"R", R}, {"eigenpairs", static_cast<double>(spec.values.size())}};
  rep.pass = std::isfinite(best);
  return rep;
}

FitReport eigfun_sup_check(const SpectralData& spec, const PiecewisePower& V,
                           const ScaleFunction& psi, const std::vector<double>& t_grid) {
  require(!t_grid.empty(), "eigenfunction check needs a t grid");
  FitReport rep;
  double worst = 0.0;
  Index arg = 0;
  for (Eigen::Index j = 0; j < spec.values.size(); ++j) {
    double inf = INFINITY;
    for (double t : t_grid)
      inf = std::min(inf, std::exp(spec.values(j) * t) / std::sqrt(V(psi.inverse(t))));
    const double sup = spec.vectors.col(j).cwiseAbs().maxCoeff();
    const double ratio = sup / inf;
    rep.profile.push_back(ratio);
    if (ratio > worst) {
      worst = ratio;
      arg = static_cast<Index>(j + 1);
    }
  }
  rep.set("C_eig", worst);
  rep.witnesses = {{"argmax_j", 0.0, arg, arg, worst}};
  rep.grid = {{"t_min", t_grid.front()}, {"t_max", t_grid.back()}};
  rep.pass = std::isfinite(worst);
  return rep;
}

FitReport holder_fit(const MetricMeasureSpace& s, const SpectralData& spec, const PiecewisePower& V,
                     const ScaleFunction& psi, const std::vector<double>& t_grid,
                     const HolderOptions& opt) {
  FitReport rep;
  constexpr int kThetas = 20;  // 0.05, 0.10, ..., 1.00
  std::vector<double> C(kThetas, 0.0);
  std::vector<Witness> wit(kThetas);
  const PointSet& I = spec.interior;
  const auto n = I.size();
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  auto dist = [&](std::size_t a, std::size_t b) {
    return s.dist(static_cast<Eigen::Index>(I[a]), static_cast<Eigen::Index>(I[b]));
  };
  std::vector<std::size_t> near_x, near_y;
  for (double t : t_grid) {
    const Eigen::MatrixXd P = heat_kernel(spec, t);
    const double r = psi.inverse(t);
    const double scale = V(r);
    for (std::size_t k = 0; k < opt.samples; ++k) {
      const std::size_t x1 = pick(rng), y1 = pick(rng);
      near_x.clear();
      near_y.clear();
      for (std::size_t z = 0; z < n; ++z) {
        if (dist(x1, z) <= r) near_x.push_back(z);
        if (dist(y1, z) <= r) near_y.push_back(z);
      }
      const std::size_t x2 = near_x[std::uniform_int_distribution<std::size_t>(0, near_x.size() - 1)(rng)];
      const std::size_t y2 = near_y[std::uniform_int_distribution<std::size_t>(0, near_y.size() - 1)(rng)];
      const double d = std::max(dist(x1, x2), dist(y1, y2));
      if (d <= 0.0) continue;
      const double dp = std::abs(P(static_cast<Eigen::Index>(x1), static_cast<Eigen::Index>(y1)) -
                                 P(static_cast<Eigen::Index>(x2), static_cast<Eigen::Index>(y2)));
      for (int q = 0; q < kThetas; ++q) {
        const double theta = 0.05 * (q + 1);
        const double c = dp * std::pow(r / d, theta) * scale;
        if (c > C[static_cast<std::size_t>(q)]) {
          C[static_cast<std::size_t>(q)] = c;
          wit[static_cast<std::size_t>(q)] = {"theta=" + std::to_string(q + 1) + "/20", t, I[x1], I[y1], c};
        }
      }
    }
  }
  int best = -1;
  for (int q = 0; q < kThetas; ++q)
    if (C[static_cast<std::size_t>(q)] <= opt.budget) best = q;
  rep.profile = C;
  rep.set("Theta", best >= 0 ? 0.05 * (best + 1) : 0.0);
  rep.set("C_H", best >= 0 ? C[static_cast<std::size_t>(best)] : INFINITY);
  if (best >= 0) rep.witnesses = {wit[static_cast<std::size_t>(best)]};
  rep.grid = {{"budget", opt.budget}, {"samples_per_t", static_cast<double>(opt.samples)},
              {"t_points", static_cast<double>(t_grid.size())}};
  rep.pass = best >= 0;
  return rep;
}

OndiagFit ondiag_fit(const std::vector<double>& t, const std::vector<double>& diag) {
  require(t.size() == diag.size(), "ondiag fit: size mismatch");
  if (t.size() < 5) fail(ErrorCode::invalid_argument, "ondiag fit needs at least 5 grid points");
  OndiagFit fit;
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i] > 0.0 && diag[i] > 0.0, "ondiag fit needs positive t and p");
    fit.log_t.push_back(std::log(t[i]));
    fit.log_p.push_back(std::log(diag[i]));
  }
  const double n = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sx += fit.log_t[i];
    sy += fit.log_p[i];
    sxx += fit.log_t[i] * fit.log_t[i];
    sxy += fit.log_t[i] * fit.log_p[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace hkelab
