#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hkelab/config.hpp"
#include "hkelab/error.hpp"

namespace hkelab {

/// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

struct StageRecord {
  std::string name;
  std::string status = "not_run";  // done | skipped | failed | not_run
  std::string inputs_hash;         // config hash chained with every earlier artifact
  std::string diagnostics;         // skip reason or error text
  double seconds = 0.0;            // wall clock; written to timing.json only
};

struct ManifestFile {
  std::string path;  // relative to the reports directory
  std::string fingerprint;
};

/// Layout: <out_dir>/<config hash>/reports/{config.cfg, *.json, models/, isometries/}
/// plus <out_dir>/<config hash>/timing.json. Everything under reports/ is a
/// function of the config alone.
struct RunManifest {
  std::string config_hash;
  std::string run_dir;
  std::vector<StageRecord> stages;
  std::vector<ManifestFile> files;
  std::map<std::string, bool> checks;  // named pass/fail verdicts
  bool complete = false;               // every stage done or skipped
  bool reused = false;                 // an existing complete run was returned

  bool checks_passed() const;
  std::string reports_dir() const { return run_dir + "/reports"; }
};

/// Thrown after the failed-stage marker and a partial manifest are written.
class StageError : public Error {
 public:
  StageError(ErrorCode code, std::string stage, std::string inputs_hash, const std::string& what)
      : Error(code, what), stage_(std::move(stage)), inputs_hash_(std::move(inputs_hash)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& inputs_hash() const noexcept { return inputs_hash_; }

 private:
  std::string stage_;
  std::string inputs_hash_;
};

struct PipelineOptions {
  std::string stop_after;  // empty: run every stage
};

/// Runs the stages in order. A complete run already present for the same
/// config hash is returned untouched; an incomplete one is replaced.
RunManifest run_pipeline(const RunConfig& cfg, const PipelineOptions& opt = {});

/// Directory a config maps to.
std::string run_directory(const RunConfig& cfg);

/// Reads reports/manifest.json of a run directory.
RunManifest load_manifest(const std::string& run_dir);

/// Curve names available in reports/curves.json, sorted.
std::vector<std::string> curve_names(const std::string& run_dir);

/// Two-column CSV with a header row; throws on an unknown curve.
void emit_plot_data(const std::string& run_dir, const std::string& curve, std::ostream& out);

struct VerifyResult {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<std::string> lines;  // one per verified item, "ok ..." or "MISMATCH ..."
};

/// Recomputes artifact fingerprints, isometry constants from the stored maps
/// and HKE witnesses from the stored graphs.
VerifyResult verify_run(const std::string& run_dir);

}  // namespace hkelab
