#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hkelab/heat_kernel.hpp"
#include "hkelab/metric_space.hpp"
#include "hkelab/scale.hpp"

namespace hkelab {

struct Witness {
  std::string what;
  double t = 0.0;
  Index x = 0;
  Index y = 0;
  double value = 0.0;
};

/// Named constants with the samples that realise them.
struct FitReport {
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::pair<std::string, double>> grid;
  std::vector<Witness> witnesses;
  std::vector<double> profile;  // per-j or per-Theta curve where relevant
  bool pass = false;

  double get(const std::string& name) const;
  void set(const std::string& name, double v);
};

/// log-spaced t with Psi(2 mesh) <= t <= Psi(window / 4).
std::vector<double> bulk_t_grid(const ScaleFunction& psi, double mesh, double window, std::size_t n);

struct HkeOptions {
  double c2 = 1.0;          // pinned exponent constant
  double c3 = 1.0;
  double delta = 0.5;       // near-diagonal radius factor of the lower bound
  double c1_budget = 50.0;
  double floor = 1e-9;      // ignore p below floor * max p(t)
};

/// Smallest C1 for which both bounds of HKE(Psi) hold over the sampled
/// (t, x, y), with c3 = 1 and c2 pinned. Also reports the largest c2 the
/// data admits at that C1.
FitReport hke_bounds_check(const MetricMeasureSpace& s, const SpectralData& spec,
                           const PiecewisePower& V, const ScaleFunction& psi,
                           const std::vector<double>& t_grid, const HkeOptions& opt = {});

/// C_weyl = max_j lambda_j Psi(R/j); profile holds lambda_j Psi(R/j).
FitReport weyl_check(const SpectralData& spec, const ScaleFunction& psi, double R);

/// ratio_j = |phi_j|_inf / inf_t exp(lambda_j t) / V(Psi^{-1}(t))^{1/2}.
FitReport eigfun_sup_check(const SpectralData& spec, const PiecewisePower& V,
                           const ScaleFunction& psi, const std::vector<double>& t_grid);

struct HolderOptions {
  double budget = 1e3;
  std::size_t samples = 2000;  // quadruples per t
  std::uint64_t seed = 1;
};

/// Largest Theta on the 0.05 grid whose fitted C stays within budget.
FitReport holder_fit(const MetricMeasureSpace& s, const SpectralData& spec, const PiecewisePower& V,
                     const ScaleFunction& psi, const std::vector<double>& t_grid,
                     const HolderOptions& opt = {});

struct OndiagFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> log_t, log_p;
};

/// Least squares of log p_t(x,x) against log t (needs >= 5 points).
OndiagFit ondiag_fit(const std::vector<double>& t, const std::vector<double>& diag);

}  // namespace hkelab
