#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "hkelab/models.hpp"

namespace hkelab {

/// Everything a pipeline run depends on. Parsed from a `key = value` file;
/// unknown keys, repeated keys and malformed values are rejected.
struct RunConfig {
  ModelFamily family = ModelFamily::gasket_cable;
  std::vector<int> levels{1, 2};  // ascending; the last level is the limit proxy
  int window = 1;
  int subdivision = 1;
  std::string graph_file;

  std::string alpha = "auto";  // "auto" or a number
  std::string beta = "auto";   // "auto", "fit" (carpet) or a number

  double radius = 1.0;  // R_n, constant over the sequence
  std::vector<double> t_values{0.1, 0.5};
  std::size_t t_grid_points = 8;
  std::size_t modes = 5;

  std::size_t dense_cap = 3000;
  double c2 = 1.0;
  double c1_budget = 50.0;
  double holder_budget = 1e3;
  std::size_t holder_samples = 500;
  double cv_bound = 10.0;

  std::uint64_t seed = 1;
  std::string isometry = "embedding";  // "embedding" or "search"
  double cube_delta = 0.5;
  int cube_depth = 3;

  std::string out_dir = "runs";

  /// Range and cross-field checks; throws Error(validation).
  void validate() const;
  /// Canonical `key = value` text, one line per key in a fixed order. The
  /// output directory is not part of it.
  std::string canonical() const;
  /// hex FNV-1a of canonical().
  std::string hash() const;
};

/// Names of every accepted key, in canonical order.
const std::vector<std::string>& config_keys();

/// Applies one assignment. Throws Error(parse) on an unknown key or bad value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Blank lines and `#` comments are ignored. Validates the result.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// The model spec for this config, with exponents resolved ("fit" runs the
/// carpet resistance fit at the finest level; its details go to `fit`).
FractalModelSpec resolve_model_spec(const RunConfig& cfg, CarpetBetaFit* fit = nullptr);

}  // namespace hkelab
