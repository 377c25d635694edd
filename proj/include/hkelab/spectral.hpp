#pragma once

#include <Eigen/Dense>

#include "hkelab/form.hpp"

namespace hkelab {

struct SpectralOptions {
  std::size_t dense_cap = 3000;  // largest interior solved densely
  bool validate = true;          // Gram and residual checks
  double gram_tol = 1e-10;
  double residual_tol = 1e-8;
};

/// Eigenpairs of K phi = lambda M phi on a part, ascending, with the phi
/// orthonormal in L^2(m restricted to the interior).
struct SpectralData {
  PointSet interior;            // global indices of the rows of `vectors`
  Eigen::VectorXd measure;      // m on the interior
  Eigen::VectorXd values;       // lambda_1 <= ... <= lambda_k
  Eigen::MatrixXd vectors;      // interior x k
  std::size_t global_size = 0;  // |X| of the parent space
  bool complete = false;
  double gram_error = 0.0;      // max |<phi_i, phi_j>_m - delta_ij|
  double residual = 0.0;        // max_j |K phi_j - lambda_j M phi_j|_inf, scaled
  const char* solver = "";

  std::size_t count() const noexcept { return static_cast<std::size_t>(values.size()); }
  std::size_t interior_size() const noexcept { return interior.size(); }
};

/// First k eigenpairs (k = 0 means all). Dense LAPACK up to the cap,
/// shift-invert Lanczos above it (partial spectra only).
SpectralData spectrum(const GraphDirichletForm& form, const BallPart& part, std::size_t k = 0,
                      const SpectralOptions& opt = {});

/// True when lambda_j(outer) <= lambda_j(inner) + tol for all shared j.
bool eigenvalues_dominated(const SpectralData& outer, const SpectralData& inner, double tol = 1e-10);

}  // namespace hkelab
