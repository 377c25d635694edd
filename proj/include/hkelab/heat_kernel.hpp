#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hkelab/spectral.hpp"

namespace hkelab {

/// p(t,x,y) = sum_j exp(-lambda_j t) phi_j(x) phi_j(y) on the interior,
/// a density with respect to m. Exactly symmetric.
Eigen::MatrixXd heat_kernel(const SpectralData& spec, double t);

/// Same kernel as a |X| x |X| matrix, zero off the interior.
Eigen::MatrixXd heat_kernel_extended(const SpectralData& spec, double t);

/// p(t,x,x) for every interior x (cheap: no full matrix).
Eigen::VectorXd heat_kernel_diagonal(const SpectralData& spec, double t);

/// Truncation bound exp(-lambda_k t) (n - k) for a partial spectrum; 0 if complete.
double truncation_bound(const SpectralData& spec, double t);

/// P_t f = sum_j exp(-lambda_j t) <f, phi_j>_m phi_j; f given on the interior.
Eigen::VectorXd semigroup_apply(const SpectralData& spec, double t, const Eigen::VectorXd& f);

struct SemigroupCheck {
  double symmetry = 0.0;            // max |p(x,y) - p(y,x)|
  double chapman_kolmogorov = 0.0;  // max |p_{t+s} - p_t *_m p_s|
  double contraction_excess = 0.0;  // max(0, |P_t f|_m - |f|_m) over samples
  double conservation = 0.0;        // max |P_t 1 - 1|, full parts only
  double markov_excess = 0.0;       // how far P_t f leaves [0,1] for f in [0,1]
  double min_entry = 0.0;           // min p(t,x,y)
  bool full = false;
};

/// Identity-grade checks of the semigroup at times t and s (complete spectra).
SemigroupCheck semigroup_identities(const SpectralData& spec, double t, double s, bool full,
                                    std::uint64_t seed, std::size_t samples = 8);

struct KernelFamily {
  std::vector<double> radii;
  std::vector<Eigen::MatrixXd> kernels;  // extended to |X| x |X|
  std::vector<double> successive_gap;    // sup |q^{R_{i+1}} - q^{R_i}|, size radii-1
  double worst_monotonicity = 0.0;       // max of q^{R_i} - q^{R_{i+1}} (should be <= tol)
  const Eigen::MatrixXd& limit() const { return kernels.back(); }
};

/// Dirichlet kernels on nested balls around p. Throws on a monotonicity
/// violation beyond 1e-12 * max(1, max|q|).
KernelFamily kernel_limit_in_R(const GraphDirichletForm& form, const MetricMeasureSpace& s, Index p,
                               const std::vector<double>& radii, double t,
                               const SpectralOptions& opt = {});

/// defect(x) = 1 - sum_y p(t,x,y) m(y) over the kernel's interior. Throws if
/// any defect is below -1e-10.
Eigen::VectorXd conservativeness_defect(const SpectralData& spec, double t);

struct ComparisonFit {
  double c = 0.0;          // prefactor
  double gamma = 0.0;      // rate
  double exponent = 0.0;   // fitted kappa in exp(-gamma (Psi(R)/t)^kappa)
  double expected = 0.0;   // 1 / (beta' - 1)
  double rms = 0.0;
  std::size_t points = 0;
};

/// Fits defect ~ c exp(-gamma x^kappa) with x = Psi(R)/t. Points with defect
/// at or below 1e-14 are dropped.
ComparisonFit fit_comparison(const std::vector<double>& x, const std::vector<double>& defect,
                             double beta_prime);

}  // namespace hkelab
