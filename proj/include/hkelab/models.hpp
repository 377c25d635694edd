#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hkelab/graph.hpp"
#include "hkelab/scale.hpp"

namespace hkelab {

enum class ModelFamily { pre_carpet, gasket_cable, generic_graph };

const char* family_name(ModelFamily f);
ModelFamily parse_family(const std::string& s);

inline const double kCarpetAlpha = std::log(8.0) / std::log(3.0);
inline const double kGasketAlpha = std::log(3.0) / std::log(2.0);
inline const double kGasketBeta = std::log(5.0) / std::log(2.0);

struct FractalModelSpec {
  ModelFamily family = ModelFamily::gasket_cable;
  int level = 0;
  int contraction = 2;      // l
  int subdivision = 1;      // m, gasket cables only
  int window = 1;           // W, carpet only: W x W unit cells
  double alpha = 0.0;
  double beta = 0.0;
  std::string graph_file;   // generic_graph only
  std::size_t vertex_cap = 20000;

  /// Fills contraction and the exponent defaults for the family. Carpet beta
  /// stays 0 until supplied or fitted.
  static FractalModelSpec defaults(ModelFamily f);
  void validate() const;
};

/// A graph with optional planar coordinates (empty for ingested graphs).
struct Model {
  WeightedGraph graph;
  std::vector<Point2> coords;
};

/// X~_n = l^{-n} X_0 restricted to the W x W window at q0 = (0,0): lattice of
/// spacing 3^{-n}, unit conductances, measure 3^{-n} * (incident length)/2.
Model pre_carpet(int n, int window, std::size_t vertex_cap = 20000);

/// The same lattice in X_0 units: spacing 1 on [0, W 3^n]^2, unit conductances,
/// cable measure (incident length)/2. Feeds rescale() for sequence members.
Model carpet_base(int n, int window, std::size_t vertex_cap = 20000);

/// Level-n gasket graph with unit edges (the V_* construction restricted to
/// the level-n triangle of side 2^n), each edge cut into m cable segments of
/// length 1/m and conductance m; measure (incident length)/2.
Model gasket_cable(int n, int m, std::size_t vertex_cap = 20000);

/// lengths x l^{-n}, measure x l^{-alpha n}, conductances x l^{(beta-alpha) n},
/// coordinates x l^{-n}.
Model rescale(const Model& base, double l, double alpha, double beta, int n);

/// Reads a graph file; result is connected and validated.
Model ingest_graph(const std::string& path);

/// Base model for spec.level, rescaled by spec.level (generic graphs are
/// returned as read).
Model build_member(const FractalModelSpec& spec);

/// Left-to-right effective resistance of carpet_base(n, 1).
double carpet_resistance(int n);

struct CarpetBetaFit {
  std::vector<double> resistance;  // R_0 .. R_N
  double rho = 0.0;                // R_N / R_{N-1}
  double beta = 0.0;               // log(8 rho) / log 3
};
CarpetBetaFit fit_carpet_beta(int finest_level);

/// Default Psi_0 / V_0 of a family (before the Psi_n / V_n transform).
ScaleFunction base_scale_function(const FractalModelSpec& spec);
PiecewisePower base_volume(const FractalModelSpec& spec);

}  // namespace hkelab
