#include "hkelab/form.hpp"

#include <algorithm>

namespace hkelab {

GraphDirichletForm::GraphDirichletForm(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  measure_ = Eigen::Map<const Eigen::VectorXd>(g.measure().data(), n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * g.edge_count());
  for (const Edge& e : g.edges()) {
    auto a = static_cast<Eigen::Index>(e.a), b = static_cast<Eigen::Index>(e.b);
    trip.emplace_back(a, a, e.conductance);
    trip.emplace_back(b, b, e.conductance);
    trip.emplace_back(a, b, -e.conductance);
    trip.emplace_back(b, a, -e.conductance);
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
}

double GraphDirichletForm::energy(const Eigen::VectorXd& u) const {
  require(u.size() == measure_.size(), "energy: function size mismatch");
  return u.dot(stiffness_ * u);
}

BallPart assemble_part(const MetricMeasureSpace& s, Index p, double R) {
  BallPart part;
  part.interior = ball(s, p, R);
  if (part.interior.empty()) fail(ErrorCode::invalid_argument, "ball part is empty");
  part.radius = R;
  part.basepoint = p;
  part.full = part.interior.size() == s.size();
  return part;
}

BallPart full_part(const MetricMeasureSpace& s) {
  BallPart part;
  for (Index i = 0; i < s.size(); ++i) part.interior.push_back(i);
  part.radius = INFINITY;
  part.basepoint = s.basepoint;
  part.full = true;
  return part;
}

Eigen::SparseMatrix<double> part_stiffness(const GraphDirichletForm& form, const BallPart& part) {
  if (part.full) return form.stiffness();
  const auto& K = form.stiffness();
  std::vector<long> slot(form.size(), -1);
  for (std::size_t i = 0; i < part.interior.size(); ++i) slot[part.interior[i]] = static_cast<long>(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    if (slot[static_cast<std::size_t>(col)] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      long r = slot[static_cast<std::size_t>(it.row())];
      if (r >= 0) trip.emplace_back(r, slot[static_cast<std::size_t>(col)], it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(part.interior.size());
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

CapacityResult cutoff_capacity(const GraphDirichletForm& form, const MetricMeasureSpace& s,
                               Index x, double r, double kappa, const ScaleFunction& psi,
                               const PiecewisePower& V) {
  require(kappa > 0.0 && kappa < 1.0, "cutoff needs kappa in (0,1)");
  require(r > 0.0, "cutoff needs r > 0");
  if (ball(s, x, r).empty()) fail(ErrorCode::invalid_argument, "cutoff ball is empty");
  Eigen::VectorXd phi(static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index y = 0; y < phi.size(); ++y)
    phi(y) = std::clamp((r - s.dist(static_cast<Eigen::Index>(x), y)) / ((1.0 - kappa) * r), 0.0, 1.0);
  CapacityResult res;
  res.energy = form.energy(phi);
  res.ratio = res.energy * psi(r) / V(r);
  return res;
}

}  // namespace hkelab
