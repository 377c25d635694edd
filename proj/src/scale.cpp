#include "hkelab/scale.hpp"

#include <algorithm>
#include <cmath>

#include "hkelab/error.hpp"

namespace hkelab {

double PiecewisePower::operator()(double r) const {
  if (r <= 0.0) return 0.0;
  double e = r <= crossover ? small_exponent : large_exponent;
  return amplitude * std::pow(r / crossover, e);
}

double PiecewisePower::inverse(double v) const {
  if (v <= 0.0) return 0.0;
  double e = v <= amplitude ? small_exponent : large_exponent;
  return crossover * std::pow(v / amplitude, 1.0 / e);
}

double PiecewisePower::min_exponent() const { return std::min(small_exponent, large_exponent); }
double PiecewisePower::max_exponent() const { return std::max(small_exponent, large_exponent); }

PiecewisePower PiecewisePower::rescaled(double l, double s, int n) const {
  // f(l^n r) has its kink where l^n r = crossover.
  PiecewisePower out = *this;
  out.crossover = crossover * std::pow(l, -n);
  out.amplitude = amplitude * std::pow(l, -s * n);
  return out;
}

SandwichCheck check_power_sandwich(const PiecewisePower& f, double constant,
                                   const std::vector<double>& grid) {
  SandwichCheck rep;
  const double lo = f.min_exponent(), hi = f.max_exponent();
  for (double r : grid)
    for (double R : grid) {
      if (!(r > 0.0) || R < r) continue;
      double q = f(R) / f(r);
      double k = R / r;
      double factor = std::max(std::pow(k, lo) / q, q / std::pow(k, hi));
      if (factor > rep.worst_ratio) {
        rep.worst_ratio = factor;
        rep.r = r;
        rep.R = R;
      }
    }
  rep.ok = rep.worst_ratio <= constant * (1.0 + 1e-12);
  return rep;
}

double phi_closed_form(double beta, double s) {
  require(beta > 1.0, "phi closed form needs beta > 1");
  if (s <= 0.0) return 0.0;
  return (beta - 1.0) * std::pow(beta, -beta / (beta - 1.0)) * std::pow(s, beta / (beta - 1.0));
}

namespace {

// Stationary point of s/r - K r^{-e} (e > 1).
double stationary_radius(double s, double K, double e) {
  return std::pow(e * K / s, 1.0 / (e - 1.0));
}

}  // namespace

double phi_transform(const ScaleFunction& psi, double s) {
  require(s >= 0.0, "phi transform needs s >= 0");
  const PiecewisePower& f = psi.f;
  require(f.min_exponent() > 1.0, "phi transform needs Psi exponents > 1");
  if (s == 0.0) return 0.0;
  auto objective = [&](double r) { return s / r - 1.0 / f(r); };

  // Each power piece A (r/rc)^e reads 1/Psi = K r^{-e} with K = rc^e / A.
  const double Ks = std::pow(f.crossover, f.small_exponent) / f.amplitude;
  const double Kl = std::pow(f.crossover, f.large_exponent) / f.amplitude;
  const double r_small = stationary_radius(s, Ks, f.small_exponent);
  const double r_large = stationary_radius(s, Kl, f.large_exponent);

  if (f.small_exponent == f.large_exponent) return objective(r_small);

  // The maximiser lies between the two piecewise stationary radii (or at the
  // kink). Scan a log grid over a padded bracket, then refine by golden
  // section in log r around the best cell.
  const double lo = std::log(std::min({r_small, r_large, f.crossover})) - 1.0;
  const double hi = std::log(std::max({r_small, r_large, f.crossover})) + 1.0;
  constexpr int kCells = 400;
  const double h = (hi - lo) / kCells;
  int best = 0;
  double best_val = -INFINITY;
  for (int i = 0; i <= kCells; ++i) {
    double v = objective(std::exp(lo + h * i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + h * std::max(best - 1, 0);
  double b = lo + h * std::min(best + 1, kCells);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = objective(std::exp(c)), fd = objective(std::exp(d));
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(std::exp(d));
    }
  }
  double v = std::max({best_val, fc, fd, objective(f.crossover)});
  return std::max(v, 0.0);
}

std::vector<double> phi_sequence_gap(const std::vector<ScaleFunction>& psis,
                                     const std::vector<double>& grid) {
  std::vector<double> out;
  if (psis.empty()) return out;
  std::vector<double> last;
  for (double s : grid) last.push_back(phi_transform(psis.back(), s));
  for (const auto& p : psis) {
    double gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      gap = std::max(gap, std::abs(phi_transform(p, grid[i]) - last[i]));
    out.push_back(gap);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi >= lo, "log grid needs 0 < lo <= hi");
  require(n >= 1, "log grid needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace hkelab
