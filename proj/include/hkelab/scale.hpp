#pragma once

#include <vector>

namespace hkelab {

/// r -> amplitude * (r/crossover)^e, with e = small_exponent below the
/// crossover and large_exponent above. Continuous and increasing for positive
/// exponents. A pure power r^e is {e, e, 1, 1}.
struct PiecewisePower {
  double small_exponent = 1.0;
  double large_exponent = 1.0;
  double crossover = 1.0;
  double amplitude = 1.0;

  static PiecewisePower power(double e) { return {e, e, 1.0, 1.0}; }

  double operator()(double r) const;
  double inverse(double v) const;
  double min_exponent() const;
  double max_exponent() const;

  /// f_n(r) = l^{-s n} f(l^n r): the exact transform of a profile under
  /// lengths x l^{-n} and values x l^{-s n}.
  PiecewisePower rescaled(double l, double s, int n) const;
};

/// Space-time scale function Psi. C0 is the sandwich constant of the
/// two-sided power comparison Psi(R)/Psi(r) vs (R/r)^{beta}, (R/r)^{beta'}.
struct ScaleFunction {
  PiecewisePower f;
  double c0 = 1.0;

  double operator()(double r) const { return f(r); }
  double inverse(double t) const { return f.inverse(t); }
  double beta() const { return f.min_exponent(); }
  double beta_prime() const { return f.max_exponent(); }
  /// Psi_n(r) = l^{-beta n} Psi(l^n r).
  ScaleFunction rescaled(double l, double beta_model, int n) const {
    return {f.rescaled(l, beta_model, n), c0};
  }
};

/// Volume profile V with regularity constant Cv.
struct VolumeProfile {
  PiecewisePower f;
  double cv = 1.0;

  double operator()(double r) const { return f(r); }
  double alpha() const { return f.min_exponent(); }
  double alpha_prime() const { return f.max_exponent(); }
};

struct SandwichCheck {
  bool ok = true;
  double worst_ratio = 1.0;  // max over pairs of the violated-side factor
  double r = 0.0, R = 0.0;
};

/// Checks C^{-1}(R/r)^{lo} <= f(R)/f(r) <= C (R/r)^{hi} for all grid pairs r <= R.
SandwichCheck check_power_sandwich(const PiecewisePower& f, double constant,
                                   const std::vector<double>& grid);

/// sup_{r>0} (s/r - 1/Psi(r)).
///
/// Pure powers use the closed form. Otherwise a log grid over a bracket that
/// provably contains the maximiser is scanned and the best cell is refined by
/// golden-section search.
double phi_transform(const ScaleFunction& psi, double s);
double phi_closed_form(double beta, double s);

/// Evaluation handle; holds the backing Psi.
class PhiTransform {
 public:
  explicit PhiTransform(ScaleFunction psi) : psi_(psi) {}
  double operator()(double s) const { return phi_transform(psi_, s); }
  const ScaleFunction& scale() const noexcept { return psi_; }

 private:
  ScaleFunction psi_;
};

/// sup over `grid` of |Phi_n - Phi_last| for each entry of `psis`.
std::vector<double> phi_sequence_gap(const std::vector<ScaleFunction>& psis,
                                     const std::vector<double>& grid);

/// n points log-spaced between lo and hi inclusive (n >= 2), or {lo} for n == 1.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace hkelab
