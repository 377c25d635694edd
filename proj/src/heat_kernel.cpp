#include "hkelab/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hkelab {

Eigen::MatrixXd heat_kernel(const SpectralData& spec, double t) {
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "heat kernel needs t > 0");
  Eigen::VectorXd half = (-0.5 * t * spec.values).array().exp();
  Eigen::MatrixXd W = spec.vectors * half.asDiagonal();
  const auto n = W.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  P.selfadjointView<Eigen::Lower>().rankUpdate(W);
  P.triangularView<Eigen::StrictlyUpper>() = P.transpose();
  return P;
}

Eigen::MatrixXd heat_kernel_extended(const SpectralData& spec, double t) {
  Eigen::MatrixXd P = heat_kernel(spec, t);
  const auto N = static_cast<Eigen::Index>(spec.global_size);
  if (P.rows() == N) return P;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  const auto& I = spec.interior;
  for (std::size_t j = 0; j < I.size(); ++j)
    for (std::size_t i = 0; i < I.size(); ++i)
      out(static_cast<Eigen::Index>(I[i]), static_cast<Eigen::Index>(I[j])) =
          P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

Eigen::VectorXd heat_kernel_diagonal(const SpectralData& spec, double t) {
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "heat kernel needs t > 0");
  Eigen::VectorXd e = (-t * spec.values).array().exp();
  return spec.vectors.array().square().matrix() * e;
}

double truncation_bound(const SpectralData& spec, double t) {
  if (spec.complete || spec.count() == 0) return 0.0;
  return std::exp(-spec.values(spec.values.size() - 1) * t) *
         static_cast<double>(spec.interior_size() - spec.count());
}

Eigen::VectorXd semigroup_apply(const SpectralData& spec, double t, const Eigen::VectorXd& f) {
  if (t < 0.0) fail(ErrorCode::invalid_argument, "semigroup needs t >= 0");
  require(f.size() == static_cast<Eigen::Index>(spec.interior_size()), "semigroup: size mismatch");
  Eigen::VectorXd coef = spec.vectors.transpose() * spec.measure.cwiseProduct(f);
  coef.array() *= (-t * spec.values).array().exp();
  return spec.vectors * coef;
}

SemigroupCheck semigroup_identities(const SpectralData& spec, double t, double s, bool full,
                                    std::uint64_t seed, std::size_t samples) {
  SemigroupCheck c;
  c.full = full;
  const Eigen::MatrixXd Pt = heat_kernel(spec, t);
  const Eigen::MatrixXd Ps = heat_kernel(spec, s);
  const Eigen::MatrixXd Pts = heat_kernel(spec, t + s);
  c.symmetry = (Pt - Pt.transpose()).cwiseAbs().maxCoeff();
  Eigen::MatrixXd comp = Pt * spec.measure.asDiagonal() * Ps;
  c.chapman_kolmogorov = (Pts - comp).cwiseAbs().maxCoeff();
  c.min_entry = Pt.minCoeff();

  const auto n = static_cast<Eigen::Index>(spec.interior_size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto mnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.cwiseAbs2().dot(spec.measure)); };
  for (std::size_t k = 0; k < samples; ++k) {
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = unit(rng);
    Eigen::VectorXd g = Pt * spec.measure.cwiseProduct(f);
    c.markov_excess = std::max({c.markov_excess, -g.minCoeff(), g.maxCoeff() - 1.0});
    Eigen::VectorXd h = f.array() - 0.5;
    Eigen::VectorXd Ph = Pt * spec.measure.cwiseProduct(h);
    c.contraction_excess = std::max(c.contraction_excess, mnorm(Ph) - mnorm(h));
  }
  if (full) {
    Eigen::VectorXd one = Pt * spec.measure;
    c.conservation = (one.array() - 1.0).abs().maxCoeff();
  }
  return c;
}

KernelFamily kernel_limit_in_R(const GraphDirichletForm& form, const MetricMeasureSpace& s, Index p,
                               const std::vector<double>& radii, double t,
                               const SpectralOptions& opt) {
  require(!radii.empty(), "kernel family needs radii");
  require(std::is_sorted(radii.begin(), radii.end()), "radii must be ascending");
  KernelFamily fam;
  fam.radii = radii;
  for (double R : radii) {
    SpectralData spec = spectrum(form, assemble_part(s, p, R), 0, opt);
    fam.kernels.push_back(heat_kernel_extended(spec, t));
  }
  for (std::size_t i = 0; i + 1 < fam.kernels.size(); ++i) {
    const Eigen::MatrixXd diff = fam.kernels[i + 1] - fam.kernels[i];
    fam.successive_gap.push_back(diff.cwiseAbs().maxCoeff());
    fam.worst_monotonicity = std::max(fam.worst_monotonicity, -diff.minCoeff());
  }
  const double tol = 1e-12 * std::max(1.0, fam.kernels.back().cwiseAbs().maxCoeff());
  if (fam.worst_monotonicity > tol)
    fail(ErrorCode::numerical, "domain monotonicity violated by " +
                                   std::to_string(fam.worst_monotonicity));
  return fam;
}

Eigen::VectorXd conservativeness_defect(const SpectralData& spec, double t) {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(spec.interior_size()));
  Eigen::VectorXd d = ones - semigroup_apply(spec, t, ones);
  if (d.size() && d.minCoeff() < -1e-10)
    fail(ErrorCode::numerical, "negative conservativeness defect " + std::to_string(d.minCoeff()));
  return d;
}

ComparisonFit fit_comparison(const std::vector<double>& x, const std::vector<double>& defect,
                             double beta_prime) {
  require(x.size() == defect.size(), "comparison fit: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (defect[i] > 1e-14 && x[i] > 0.0) {
      xs.push_back(x[i]);
      ys.push_back(std::log(defect[i]));
    }
  ComparisonFit best;
  best.expected = 1.0 / (beta_prime - 1.0);
  best.points = xs.size();
  if (xs.size() < 3) return best;
  best.rms = INFINITY;
  for (double kappa = 0.05; kappa <= 3.0 + 1e-12; kappa += 0.005) {
    // y = a - gamma u with u = x^kappa.
    double su = 0, sy = 0, suu = 0, suy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double u = std::pow(xs[i], kappa);
      su += u;
      sy += ys[i];
      suu += u * u;
      suy += u * ys[i];
    }
    double den = n * suu - su * su;
    if (std::abs(den) < 1e-300) continue;
    double slope = (n * suy - su * sy) / den;
    double a = (sy - slope * su) / n;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r = ys[i] - (a + slope * std::pow(xs[i], kappa));
      rss += r * r;
    }
    double rms = std::sqrt(rss / n);
    if (rms < best.rms && slope < 0) {
      best.rms = rms;
      best.exponent = kappa;
      best.gamma = -slope;
      best.c = std::exp(a);
    }
  }
  return best;
}

}  // namespace hkelab
