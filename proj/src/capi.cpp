#include "hkelab/hkelab.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hkelab/config.hpp"
#include "hkelab/pipeline.hpp"

struct hkelab_config {
  hkelab::RunConfig cfg;
};

struct hkelab_run {
  hkelab::RunManifest manifest;
  std::vector<std::pair<std::string, bool>> checks;  // flattened for index access
};

namespace {

thread_local std::string g_last_error;

hkelab_status status_of(hkelab::ErrorCode code) {
  using hkelab::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse:
    case ErrorCode::validation: return HKELAB_INVALID_ARGUMENT;
    case ErrorCode::io: return HKELAB_IO_ERROR;
    case ErrorCode::numerical: return HKELAB_NUMERICAL_ERROR;
    case ErrorCode::check_failed: return HKELAB_CHECK_FAILED;
    case ErrorCode::internal: return HKELAB_INTERNAL_ERROR;
  }
  return HKELAB_INTERNAL_ERROR;
}

hkelab_status fail(hkelab_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
hkelab_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const hkelab::StageError& e) {
    return fail(HKELAB_STAGE_FAILED, e.what());
  } catch (const hkelab::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HKELAB_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(HKELAB_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(HKELAB_INTERNAL_ERROR, "unknown exception");
  }
}

hkelab_status copy_out(const std::string& text, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf || len == 0) return text.empty() ? HKELAB_OK : fail(HKELAB_INVALID_ARGUMENT, "output buffer too small");
  const size_t n = std::min(len - 1, text.size());
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
  return n == text.size() ? HKELAB_OK : fail(HKELAB_INVALID_ARGUMENT, "output buffer too small");
}

hkelab_run* wrap(hkelab::RunManifest m) {
  auto* r = new hkelab_run{std::move(m), {}};
  for (const auto& kv : r->manifest.checks) r->checks.emplace_back(kv.first, kv.second);
  return r;
}

}  // namespace

extern "C" {

const char* hkelab_version(void) { return "1.0.0"; }

const char* hkelab_last_error(void) { return g_last_error.c_str(); }

hkelab_status hkelab_config_load(const char* path, hkelab_config** out) {
  if (!path || !out) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new hkelab_config{hkelab::load_config(path)};
    return HKELAB_OK;
  });
}

hkelab_status hkelab_config_parse(const char* text, hkelab_config** out) {
  if (!text || !out) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new hkelab_config{hkelab::parse_config_text(text)};
    return HKELAB_OK;
  });
}

hkelab_status hkelab_config_set(hkelab_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    hkelab::RunConfig next = cfg->cfg;
    hkelab::set_config_value(next, key, value);
    cfg->cfg = std::move(next);
    return HKELAB_OK;
  });
}

hkelab_status hkelab_config_validate(const hkelab_config* cfg) {
  if (!cfg) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->cfg.validate();
    return HKELAB_OK;
  });
}

hkelab_status hkelab_config_hash(const hkelab_config* cfg, char* buf, size_t len) {
  if (!cfg || !buf) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] { return copy_out(cfg->cfg.hash(), buf, len, nullptr); });
}

void hkelab_config_free(hkelab_config* cfg) { delete cfg; }

hkelab_status hkelab_run_pipeline(const hkelab_config* cfg, const char* stop_after, hkelab_run** out) {
  if (!cfg || !out) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    hkelab::PipelineOptions opt;
    if (stop_after) opt.stop_after = stop_after;
    *out = wrap(hkelab::run_pipeline(cfg->cfg, opt));
    return (*out)->manifest.checks_passed() ? HKELAB_OK : HKELAB_CHECK_FAILED;
  });
}

hkelab_status hkelab_run_open(const char* run_dir, hkelab_run** out) {
  if (!run_dir || !out) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = wrap(hkelab::load_manifest(run_dir));
    return HKELAB_OK;
  });
}

const char* hkelab_run_dir(const hkelab_run* run) { return run ? run->manifest.run_dir.c_str() : ""; }

size_t hkelab_run_stage_count(const hkelab_run* run) { return run ? run->manifest.stages.size() : 0; }

const char* hkelab_run_stage_name(const hkelab_run* run, size_t i) {
  return run && i < run->manifest.stages.size() ? run->manifest.stages[i].name.c_str() : "";
}

const char* hkelab_run_stage_status(const hkelab_run* run, size_t i) {
  return run && i < run->manifest.stages.size() ? run->manifest.stages[i].status.c_str() : "";
}

size_t hkelab_run_check_count(const hkelab_run* run) { return run ? run->checks.size() : 0; }

const char* hkelab_run_check_name(const hkelab_run* run, size_t i) {
  return run && i < run->checks.size() ? run->checks[i].first.c_str() : "";
}

int hkelab_run_check_passed(const hkelab_run* run, size_t i) {
  return run && i < run->checks.size() && run->checks[i].second ? 1 : 0;
}

int hkelab_run_passed(const hkelab_run* run) { return run && run->manifest.checks_passed() ? 1 : 0; }

int hkelab_run_complete(const hkelab_run* run) { return run && run->manifest.complete ? 1 : 0; }

int hkelab_run_reused(const hkelab_run* run) { return run && run->manifest.reused ? 1 : 0; }

void hkelab_run_free(hkelab_run* run) { delete run; }

hkelab_status hkelab_config_run_dir(const hkelab_config* cfg, char* buf, size_t len, size_t* needed) {
  if (!cfg) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] { return copy_out(hkelab::run_directory(cfg->cfg), buf, len, needed); });
}

hkelab_status hkelab_curve_names(const char* run_dir, char* buf, size_t len, size_t* needed) {
  if (!run_dir) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::string text;
    for (const auto& n : hkelab::curve_names(run_dir)) text += n + "\n";
    return copy_out(text, buf, len, needed);
  });
}

hkelab_status hkelab_emit_plot_data(const char* run_dir, const char* curve, const char* out_path, char* buf,
                                    size_t len, size_t* needed) {
  if (!run_dir || !curve) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ostringstream csv;
    hkelab::emit_plot_data(run_dir, curve, csv);
    if (!out_path) return copy_out(csv.str(), buf, len, needed);
    std::ofstream f(out_path, std::ios::binary);
    f << csv.str();
    if (!f) return fail(HKELAB_IO_ERROR, std::string("cannot write ") + out_path);
    if (needed) *needed = csv.str().size() + 1;
    return HKELAB_OK;
  });
}

hkelab_status hkelab_verify(const char* run_dir, char* buf, size_t len, size_t* needed) {
  if (!run_dir) return fail(HKELAB_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto v = hkelab::verify_run(run_dir);
    std::string text;
    for (const auto& l : v.lines) text += l + "\n";
    const hkelab_status copied = copy_out(text, buf, len, needed);
    if (copied != HKELAB_OK) return copied;
    return v.ok ? HKELAB_OK : fail(HKELAB_CHECK_FAILED, "verification found mismatches");
  });
}

}  // extern "C"
