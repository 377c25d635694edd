// Command-line front end. Talks to the library only through hkelab.h.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hkelab/hkelab.h"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kInternal = 3 };

int exit_for(hkelab_status s) {
  switch (s) {
    case HKELAB_OK: return kPass;
    case HKELAB_CHECK_FAILED: return kCheckFailed;
    case HKELAB_INVALID_ARGUMENT: return kUsage;
    default: return kInternal;
  }
}

int report_error(hkelab_status s, const std::string& context) {
  std::cerr << "hkelab: " << context << ": " << hkelab_last_error() << "\n";
  return exit_for(s);
}

// Runs the two-call buffer protocol of the text-returning API functions.
template <class F>
hkelab_status fetch_text(F call, std::string& out) {
  size_t needed = 0;
  hkelab_status s = call(nullptr, 0, &needed);
  if (s != HKELAB_OK && s != HKELAB_INVALID_ARGUMENT && s != HKELAB_CHECK_FAILED) return s;
  std::vector<char> buf(needed ? needed : 1);
  s = call(buf.data(), buf.size(), &needed);
  out.assign(buf.data());
  return s;
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> level;
  std::string stage;
  std::string curve;
  std::string output;
  std::string run;
  bool list_curves = false;
};

const std::map<std::string, std::string> kStageOf{
    {"generate", "generate"}, {"align", "isometries"}, {"spectrum", "spectra"}, {"kernel", "kernels"},
    {"hke-check", "hke"},     {"converge", "convergence"}, {"report", ""}};

int load(const Options& o, hkelab_config** cfg) {
  if (o.config.empty()) {
    std::cerr << "hkelab: --config is required\n";
    return kUsage;
  }
  hkelab_status s = hkelab_config_load(o.config.c_str(), cfg);
  if (s != HKELAB_OK) {
    report_error(s, "config " + o.config);
    return kUsage;
  }
  std::string out = o.out;
  if (out.empty())
    if (const char* env = std::getenv("HKELAB_OUT_DIR"); env && *env) out = env;
  std::vector<std::pair<std::string, std::string>> overrides;
  if (!out.empty()) overrides.emplace_back("out_dir", out);
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.level) overrides.emplace_back("levels", std::to_string(*o.level));
  for (const auto& [k, v] : overrides)
    if ((s = hkelab_config_set(*cfg, k.c_str(), v.c_str())) != HKELAB_OK) return report_error(s, "--" + k);
  if ((s = hkelab_config_validate(*cfg)) != HKELAB_OK) return report_error(s, "config");
  return kPass;
}

void print_run(const hkelab_run* run) {
  std::cout << "run directory: " << hkelab_run_dir(run) << (hkelab_run_reused(run) ? " (reused)" : "") << "\n";
  for (size_t i = 0; i < hkelab_run_stage_count(run); ++i)
    std::cout << "  stage " << hkelab_run_stage_name(run, i) << ": " << hkelab_run_stage_status(run, i) << "\n";
  for (size_t i = 0; i < hkelab_run_check_count(run); ++i)
    std::cout << "  check " << hkelab_run_check_name(run, i) << ": "
              << (hkelab_run_check_passed(run, i) ? "pass" : "FAIL") << "\n";
  std::cout << (hkelab_run_passed(run) ? "PASS" : "FAIL") << "\n";
}

int emit_curves(const Options& o, const std::string& dir) {
  if (o.list_curves) {
    std::string names;
    hkelab_status s = fetch_text(
        [&](char* b, size_t n, size_t* need) { return hkelab_curve_names(dir.c_str(), b, n, need); }, names);
    if (s != HKELAB_OK) return report_error(s, "curves");
    std::cout << names;
  }
  if (!o.curve.empty()) {
    hkelab_status s;
    if (o.output.empty()) {
      std::string csv;
      s = fetch_text(
          [&](char* b, size_t n, size_t* need) {
            return hkelab_emit_plot_data(dir.c_str(), o.curve.c_str(), nullptr, b, n, need);
          },
          csv);
      if (s == HKELAB_OK) std::cout << csv;
    } else {
      s = hkelab_emit_plot_data(dir.c_str(), o.curve.c_str(), o.output.c_str(), nullptr, 0, nullptr);
    }
    if (s != HKELAB_OK) return report_error(s, "curve " + o.curve);
  }
  return kPass;
}

int run_stage(const std::string& cmd, const Options& o) {
  hkelab_config* cfg = nullptr;
  if (int rc = load(o, &cfg); rc != kPass) {
    hkelab_config_free(cfg);
    return rc;
  }
  const std::string stop = o.stage.empty() ? kStageOf.at(cmd) : o.stage;
  hkelab_run* run = nullptr;
  hkelab_status s = hkelab_run_pipeline(cfg, stop.empty() ? nullptr : stop.c_str(), &run);
  hkelab_config_free(cfg);
  if (!run) return report_error(s, cmd);
  print_run(run);
  int rc = exit_for(s);
  if (cmd == "report") {
    const int e = emit_curves(o, hkelab_run_dir(run));
    if (e != kPass) rc = e;
  }
  hkelab_run_free(run);
  return rc;
}

int verify(const Options& o) {
  std::string dir = o.run;
  if (dir.empty()) {
    hkelab_config* cfg = nullptr;
    if (int rc = load(o, &cfg); rc != kPass) {
      hkelab_config_free(cfg);
      return rc;
    }
    hkelab_status s = fetch_text(
        [&](char* b, size_t n, size_t* need) { return hkelab_config_run_dir(cfg, b, n, need); }, dir);
    hkelab_config_free(cfg);
    if (s != HKELAB_OK) return report_error(s, "verify");
  }
  std::string text;
  hkelab_status s = fetch_text(
      [&](char* b, size_t n, size_t* need) { return hkelab_verify(dir.c_str(), b, n, need); }, text);
  std::cout << text;
  if (s != HKELAB_OK && s != HKELAB_CHECK_FAILED) return report_error(s, "verify");
  std::cout << (s == HKELAB_OK ? "VERIFIED" : "MISMATCH") << "\n";
  return exit_for(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat kernel estimate laboratory"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "key = value run configuration");
  app.add_option("--out", o.out, "output directory (overrides config and HKELAB_OUT_DIR)");
  app.add_option("--seed", o.seed, "random seed override");
  app.add_option("--level", o.level, "run a single level");
  app.add_option("--stage", o.stage, "stop after this stage");
  app.add_option("--curve", o.curve, "report: emit this curve as CSV");
  app.add_option("--output", o.output, "report: CSV destination (default stdout)");
  app.add_flag("--list-curves", o.list_curves, "report: list curve names");
  app.add_option("--run", o.run, "verify: run directory (default: from --config)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"generate", "build the level models"},
      {"align", "approximate isometries between levels"},
      {"spectrum", "Dirichlet spectra on the balls and full graphs"},
      {"kernel", "heat kernels, semigroup identities, on-diagonal fit"},
      {"hke-check", "HKE, eigenfunction and Hoelder fits"},
      {"converge", "convergence curves against the finest level"},
      {"report", "full pipeline, optionally emitting plot data"},
      {"verify", "re-derive reported numbers from stored artifacts"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return cmd == "verify" ? verify(o) : run_stage(cmd, o);
  } catch (const std::exception& e) {
    std::cerr << "hkelab: " << e.what() << "\n";
    return kInternal;
  }
}
