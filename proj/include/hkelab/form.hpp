#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "hkelab/metric_space.hpp"
#include "hkelab/scale.hpp"

namespace hkelab {

/// E(u) = 1/2 sum_{x,y} c(x,y) (u(x) - u(y))^2 with vertex measure m.
class GraphDirichletForm {
 public:
  explicit GraphDirichletForm(const WeightedGraph& g);

  std::size_t size() const noexcept { return measure_.size(); }
  const Eigen::VectorXd& measure() const noexcept { return measure_; }
  /// Symmetric stiffness matrix K with u^T K u = E(u).
  const Eigen::SparseMatrix<double>& stiffness() const noexcept { return stiffness_; }

  double energy(const Eigen::VectorXd& u) const;

 private:
  Eigen::VectorXd measure_;
  Eigen::SparseMatrix<double> stiffness_;
};

/// Part of the form on the open ball B(p, R): functions vanish off the ball.
struct BallPart {
  PointSet interior;  // sorted global indices
  double radius = 0.0;
  Index basepoint = 0;
  bool full = false;  // interior is the whole space
};

BallPart assemble_part(const MetricMeasureSpace& s, Index p, double R);
BallPart full_part(const MetricMeasureSpace& s);

/// Stiffness restricted to the part (rows/columns of the interior; diagonal
/// keeps every incident conductance, which is the absorbing boundary).
Eigen::SparseMatrix<double> part_stiffness(const GraphDirichletForm& form, const BallPart& part);

struct CapacityResult {
  double energy = 0.0;
  double ratio = 0.0;  // energy * Psi(r) / V(r)
};

/// Tent cutoff phi(y) = clamp((r - d(x,y)) / ((1-kappa) r), 0, 1).
CapacityResult cutoff_capacity(const GraphDirichletForm& form, const MetricMeasureSpace& s,
                               Index x, double r, double kappa, const ScaleFunction& psi,
                               const PiecewisePower& V);

}  // namespace hkelab
