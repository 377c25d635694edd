#pragma once

#include <map>
#include <string>
#include <vector>

#include "hkelab/heat_kernel.hpp"
#include "hkelab/isometry.hpp"
#include "hkelab/models.hpp"
#include "hkelab/volume.hpp"

namespace hkelab {

/// One member of a converging sequence, with everything the diagnostics need.
struct SequenceMember {
  int level = 0;
  Model model;
  MetricMeasureSpace space;
  ScaleFunction psi;
  PiecewisePower volume;
  double mesh = 0.0;  // shortest edge
};

/// Members ordered by level; the last one is the limit proxy. `to_proxy[i]`
/// maps member i to the proxy (f) and back (g).
struct SpaceSequence {
  std::vector<SequenceMember> members;
  std::vector<ApproxIsometry> to_proxy;
  std::vector<ApproxIsometry> consecutive;  // member i -> member i+1
  std::vector<double> radii;                // R_n per member

  const SequenceMember& proxy() const { return members.back(); }
};

/// Builds member `level` of the family in `spec` (spec.level is ignored),
/// with Psi_n and V_n from the exact rescaling of the family profiles.
SequenceMember make_member(const FractalModelSpec& spec, int level);

/// Same, for a model built (or read back) elsewhere.
SequenceMember member_from_model(const FractalModelSpec& spec, int level, Model model);

enum class IsometryMode { embedding, search };

/// Members for `levels` (ascending; last = proxy), isometries to the proxy
/// and between neighbours, and a constant radius schedule R.
SpaceSequence make_sequence(const FractalModelSpec& spec, const std::vector<int>& levels, double R,
                            IsometryMode mode = IsometryMode::embedding);

/// (u o f) on the member's ball, 0 elsewhere. Throws if u is nonzero off the
/// proxy ball.
Eigen::VectorXd l2_embed(const Eigen::VectorXd& u, const ApproxIsometry& iso,
                         const PointSet& member_ball, const PointSet& proxy_ball);

/// | |embed u|_{m_n} - |u|_{m_N} |.
double norm_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& embedded,
                const std::vector<double>& proxy_measure, const std::vector<double>& member_measure);

struct KernelGap {
  double gap = 0.0;
  bool reliable = true;  // false when t sits below the member's bulk floor
};

/// sup over proxy-ball pairs of |p_n(t, g x, g y) - q(t, x, y)|; kernels are
/// extended (|X| x |X|) matrices.
KernelGap pullback_kernel_gap(const Eigen::MatrixXd& member_kernel, const std::vector<Index>& g,
                              const Eigen::MatrixXd& proxy_kernel, const PointSet& proxy_ball,
                              double t, double member_floor);

/// Groups ascending eigenvalues whose relative gap is below tol.
std::vector<std::vector<Index>> eigen_clusters(const Eigen::VectorXd& values, double tol = 1e-6);

/// Indices (0-based) of the first `count` simple eigenvalues.
std::vector<Index> simple_modes(const Eigen::VectorXd& values, std::size_t count, double tol = 1e-6);

struct EigenGap {
  std::vector<double> value_gap;       // |lambda_n,j - lambda_N,j|, j < J
  std::vector<double> function_gap;    // simple modes: min over sign of the sup gap; NaN in clusters
  std::vector<double> projector_gap;   // per cluster touching j < J
  std::vector<std::vector<Index>> clusters;
};

/// Eigenfunctions are compared on the proxy interior through g, with the
/// member eigenfunctions extended by zero.
EigenGap eigen_data_gap(const SpectralData& member, const SpectralData& proxy,
                        const std::vector<Index>& g, std::size_t J, double cluster_tol = 1e-6);

/// |P^n_t (v o f) - (Q_t v) o f|_{m_n} for v on the proxy (global indexing,
/// supported in the proxy interior).
double mosco_residual(const Eigen::VectorXd& v, double t, const SpectralData& member,
                      const SpectralData& proxy, const ApproxIsometry& iso,
                      const std::vector<double>& member_measure);

struct LimitMeasure {
  std::vector<double> mass;  // on proxy points
  RegularityReport regularity;
};

/// Pushforward of the last non-proxy member's measure on the closed ball
/// B(p, R), judged against V_infinity on radii above that member's mesh.
LimitMeasure limit_measure_estimate(const SpaceSequence& seq, double R, const VolumeProfile& V,
                                    const std::vector<double>& r_grid, std::size_t member = SIZE_MAX);

/// Curves indexed by member (proxy excluded).
struct ConvergenceReport {
  std::vector<int> levels;
  std::map<std::string, std::vector<double>> curves;
  std::map<std::string, bool> monotone;
  std::vector<std::string> unreliable;  // curve names with a flagged point
};

/// Non-increasing up to 1e-12 relative slack, over the last `window` entries
/// (0 = all).
bool monotone_nonincreasing(const std::vector<double>& v, std::size_t window = 0);

struct ConvergenceOptions {
  std::vector<double> t_values{0.1, 0.5};
  std::size_t modes = 5;
  std::size_t verdict_window = 3;
  SpectralOptions spectral;
};

/// Kernel, eigenvalue, weak-measure, Mosco, norm and diameter curves for every
/// member against the proxy on the balls B(p, R_n).
ConvergenceReport convergence_report(const SpaceSequence& seq, const ConvergenceOptions& opt = {});

}  // namespace hkelab
