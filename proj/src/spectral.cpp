#include "hkelab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <lapacke.h>

namespace hkelab {

namespace {

// A = M^{-1/2} K M^{-1/2}.
Eigen::SparseMatrix<double> symmetrized(const Eigen::SparseMatrix<double>& K,
                                        const Eigen::VectorXd& inv_sqrt_m) {
  Eigen::SparseMatrix<double> A = K;
  for (Eigen::Index col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      it.valueRef() *= inv_sqrt_m(it.row()) * inv_sqrt_m(col);
  return A;
}

double inf_norm(const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

void dense_solve(const Eigen::SparseMatrix<double>& A, std::size_t k, Eigen::VectorXd& w,
                 Eigen::MatrixXd& V) {
  const auto n = static_cast<lapack_int>(A.rows());
  Eigen::MatrixXd D = Eigen::MatrixXd(A);
  if (k == static_cast<std::size_t>(n)) {
    w.resize(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, D.data(), n, w.data());
    if (info != 0)
      fail(ErrorCode::numerical, "dsyevd failed to converge (info " + std::to_string(info) + ")");
    V = std::move(D);
    return;
  }
  const auto kk = static_cast<lapack_int>(k);
  lapack_int found = 0;
  Eigen::VectorXd all(n);
  V.resize(n, kk);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(kk));
  lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, D.data(), n, 0.0, 0.0, 1,
                                   kk, 0.0, &found, all.data(), V.data(), n, support.data());
  if (info != 0 || found != kk)
    fail(ErrorCode::numerical, "dsyevr failed (info " + std::to_string(info) + ", found " +
                                   std::to_string(found) + " of " + std::to_string(kk) + ")");
  w = all.head(kk);
}

// Shift-invert Lanczos with full reorthogonalisation for the k smallest
// eigenpairs of the sparse symmetric PSD matrix A.
void lanczos_solve(const Eigen::SparseMatrix<double>& A, std::size_t k, double tol, Eigen::VectorXd& w,
                   Eigen::MatrixXd& V) {
  const Eigen::Index n = A.rows();
  const double scale = std::max(1.0, inf_norm(A));
  const double sigma = -1e-6 * scale;
  Eigen::SparseMatrix<double> S = A;
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  S -= sigma * I;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::numerical, "Lanczos shift factorisation failed");

  auto steps = static_cast<Eigen::Index>(std::max<std::size_t>(2 * k + 20, 3 * k));
  double worst = INFINITY;
  for (int attempt = 0; attempt < 8; ++attempt) {
    steps = std::min(steps, n);
    Eigen::MatrixXd Q(n, steps + 1);
    Eigen::VectorXd alpha(steps), beta(steps);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i));
    Q.col(0) = q.normalized();
    Eigen::Index m = steps;
    for (Eigen::Index j = 0; j < steps; ++j) {
      Eigen::VectorXd z = ldlt.solve(Q.col(j));
      alpha(j) = Q.col(j).dot(z);
      for (int pass = 0; pass < 2; ++pass) z -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * z);
      beta(j) = z.norm();
      if (beta(j) < 1e-13 * std::abs(alpha(j))) {
        m = j + 1;
        break;
      }
      Q.col(j + 1) = z / beta(j);
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      T(j, j) = alpha(j);
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const auto want = static_cast<Eigen::Index>(std::min<std::size_t>(k, static_cast<std::size_t>(m)));
    // Largest theta of the inverse are the smallest lambda of A.
    w.resize(want);
    V.resize(n, want);
    for (Eigen::Index i = 0; i < want; ++i) {
      Eigen::Index col = m - 1 - i;
      w(i) = sigma + 1.0 / es.eigenvalues()(col);
      V.col(i) = (Q.leftCols(m) * es.eigenvectors().col(col)).normalized();
    }
    worst = 0.0;
    for (Eigen::Index i = 0; i < want; ++i)
      worst = std::max(worst, (A * V.col(i) - w(i) * V.col(i)).lpNorm<Eigen::Infinity>() / scale);
    if (want == static_cast<Eigen::Index>(k) && worst <= tol) return;
    if (steps == n) break;
    steps *= 2;
  }
  fail(ErrorCode::numerical, "Lanczos did not converge; worst scaled residual " + std::to_string(worst));
}

}  // namespace

SpectralData spectrum(const GraphDirichletForm& form, const BallPart& part, std::size_t k,
                      const SpectralOptions& opt) {
  const std::size_t n = part.interior.size();
  require(n > 0, "spectrum of an empty part");
  if (k == 0) k = n;
  require(k <= n, "requested more eigenpairs than interior vertices");

  SpectralData out;
  out.interior = part.interior;
  out.global_size = form.size();
  out.measure.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    out.measure(static_cast<Eigen::Index>(i)) = form.measure()(static_cast<Eigen::Index>(part.interior[i]));
  const Eigen::VectorXd inv_sqrt = out.measure.cwiseSqrt().cwiseInverse();
  const Eigen::SparseMatrix<double> A = symmetrized(part_stiffness(form, part), inv_sqrt);

  Eigen::MatrixXd V;
  if (n <= opt.dense_cap) {
    dense_solve(A, k, out.values, V);
    out.solver = k == n ? "dsyevd" : "dsyevr";
  } else {
    if (k == n)
      fail(ErrorCode::invalid_argument, "complete spectrum of " + std::to_string(n) +
                                            " interior vertices exceeds dense cap " +
                                            std::to_string(opt.dense_cap));
    lanczos_solve(A, k, opt.residual_tol, out.values, V);
    out.solver = "lanczos";
  }
  out.complete = out.values.size() == static_cast<Eigen::Index>(n);

  // Deterministic sign: first clearly nonzero entry positive.
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    const double big = V.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < V.rows(); ++i)
      if (std::abs(V(i, j)) > 1e-8 * big) {
        if (V(i, j) < 0) V.col(j) *= -1.0;
        break;
      }
  }

  if (opt.validate) {
    const double scale = std::max(1.0, inf_norm(A));
    Eigen::MatrixXd R = A * V - V * out.values.asDiagonal();
    out.residual = R.size() ? R.cwiseAbs().maxCoeff() / scale : 0.0;
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(V.cols(), V.cols());
    G.noalias() -= V.transpose() * V;
    out.gram_error = G.size() ? G.cwiseAbs().maxCoeff() : 0.0;
    if (out.residual > opt.residual_tol)
      fail(ErrorCode::numerical, "eigen residual " + std::to_string(out.residual) + " above tolerance");
    if (out.gram_error > opt.gram_tol)
      fail(ErrorCode::numerical, "eigenvector Gram error " + std::to_string(out.gram_error) +
                                     " above tolerance");
  }
  out.vectors = inv_sqrt.asDiagonal() * V;
  for (Eigen::Index j = 0; j < out.values.size(); ++j) out.values(j) = std::max(out.values(j), 0.0);
  return out;
}

bool eigenvalues_dominated(const SpectralData& outer, const SpectralData& inner, double tol) {
  const Eigen::Index k = std::min(outer.values.size(), inner.values.size());
  for (Eigen::Index j = 0; j < k; ++j)
    if (outer.values(j) > inner.values(j) + tol * std::max(1.0, inner.values(j))) return false;
  return true;
}

}  // namespace hkelab
