#include "hkelab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "hkelab/error.hpp"
#include "hkelab/format.hpp"

namespace hkelab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  fail(ErrorCode::parse, "config key '" + key + "': bad value '" + value + "' (" + why + ")");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "expected a finite number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    bad_value(key, v, "expected a non-negative integer");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const std::uint64_t u = to_u64(key, v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) bad_value(key, v, "too large");
  return static_cast<int>(u);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string exponent_value(const std::string& key, const std::string& v, bool allow_fit) {
  if (v == "auto" || (allow_fit && v == "fit")) return v;
  const double x = to_double(key, v);
  if (x <= 0.0) bad_value(key, v, "must be positive");
  return format_double(x);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Canonical order; out_dir is last and excluded from the hash.
const std::vector<Key>& key_table() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add_double = [&](const char* name, double RunConfig::*f) {
      k.push_back({name, [f, name](RunConfig& c, const std::string& v) { c.*f = to_double(name, v); },
                   [f](const RunConfig& c) { return format_double(c.*f); }});
    };
    auto add_size = [&](const char* name, std::size_t RunConfig::*f) {
      k.push_back({name,
                   [f, name](RunConfig& c, const std::string& v) {
                     c.*f = static_cast<std::size_t>(to_u64(name, v));
                   },
                   [f](const RunConfig& c) { return std::to_string(c.*f); }});
    };
    auto add_int = [&](const char* name, int RunConfig::*f) {
      k.push_back({name, [f, name](RunConfig& c, const std::string& v) { c.*f = to_int(name, v); },
                   [f](const RunConfig& c) { return std::to_string(c.*f); }});
    };

    k.push_back({"family",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.family = parse_family(v);
                   } catch (const Error&) {
                     bad_value("family", v, "expected gasket, carpet or graph");
                   }
                 },
                 [](const RunConfig& c) { return std::string(family_name(c.family)); }});
    k.push_back({"levels",
                 [](RunConfig& c, const std::string& v) {
                   c.levels.clear();
                   for (const auto& item : split_list(v)) c.levels.push_back(to_int("levels", item));
                 },
                 [](const RunConfig& c) {
                   return join(c.levels, [](int x) { return std::to_string(x); });
                 }});
    add_int("window", &RunConfig::window);
    add_int("subdivision", &RunConfig::subdivision);
    k.push_back({"graph_file", [](RunConfig& c, const std::string& v) { c.graph_file = v; },
                 [](const RunConfig& c) { return c.graph_file; }});
    k.push_back({"alpha",
                 [](RunConfig& c, const std::string& v) { c.alpha = exponent_value("alpha", v, false); },
                 [](const RunConfig& c) { return c.alpha; }});
    k.push_back({"beta",
                 [](RunConfig& c, const std::string& v) { c.beta = exponent_value("beta", v, true); },
                 [](const RunConfig& c) { return c.beta; }});
    add_double("radius", &RunConfig::radius);
    k.push_back({"t_values",
                 [](RunConfig& c, const std::string& v) {
                   c.t_values.clear();
                   for (const auto& item : split_list(v)) c.t_values.push_back(to_double("t_values", item));
                 },
                 [](const RunConfig& c) { return join(c.t_values, [](double x) { return format_double(x); }); }});
    add_size("t_grid_points", &RunConfig::t_grid_points);
    add_size("modes", &RunConfig::modes);
    add_size("dense_cap", &RunConfig::dense_cap);
    add_double("c2", &RunConfig::c2);
    add_double("c1_budget", &RunConfig::c1_budget);
    add_double("holder_budget", &RunConfig::holder_budget);
    add_size("holder_samples", &RunConfig::holder_samples);
    add_double("cv_bound", &RunConfig::cv_bound);
    k.push_back({"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    k.push_back({"isometry",
                 [](RunConfig& c, const std::string& v) {
                   if (v != "embedding" && v != "search") bad_value("isometry", v, "expected embedding or search");
                   c.isometry = v;
                 },
                 [](const RunConfig& c) { return c.isometry; }});
    add_double("cube_delta", &RunConfig::cube_delta);
    add_int("cube_depth", &RunConfig::cube_depth);
    k.push_back({"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
                 [](const RunConfig& c) { return c.out_dir; }});
    return k;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : key_table())
    if (k.name == key) return k.set(cfg, trim(value));
  fail(ErrorCode::parse, "unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::validation, "config: " + what);
  };
  check(!levels.empty(), "levels must not be empty");
  check(std::is_sorted(levels.begin(), levels.end()) &&
            std::adjacent_find(levels.begin(), levels.end()) == levels.end(),
        "levels must be strictly ascending");
  check(levels.front() >= 0, "levels must be >= 0");
  check(window >= 1, "window must be >= 1");
  check(subdivision >= 1, "subdivision must be >= 1");
  check(family != ModelFamily::generic_graph || !graph_file.empty(), "graph family needs graph_file");
  check(family != ModelFamily::generic_graph || levels.size() == 1, "graph family takes a single level");
  check(beta != "fit" || family == ModelFamily::pre_carpet, "beta = fit applies to the carpet only");
  check(radius > 0.0, "radius must be positive");
  check(!t_values.empty(), "t_values must not be empty");
  for (double t : t_values) check(t > 0.0, "t_values must be positive");
  check(t_grid_points >= 5, "t_grid_points must be >= 5 (on-diagonal fit)");
  check(modes >= 1, "modes must be >= 1");
  check(dense_cap >= 1, "dense_cap must be >= 1");
  check(c2 > 0.0, "c2 must be positive");
  check(c1_budget > 0.0, "c1_budget must be positive");
  check(holder_budget > 0.0, "holder_budget must be positive");
  check(holder_samples >= 1, "holder_samples must be >= 1");
  check(cv_bound >= 1.0, "cv_bound must be >= 1");
  check(cube_delta > 0.0 && cube_delta < 1.0, "cube_delta must lie in (0, 1)");
  check(cube_depth >= 1, "cube_depth must be >= 1");
  check(!out_dir.empty(), "out_dir must not be empty");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& k : key_table())
    if (k.name != "out_dir") out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::parse, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second)
      fail(ErrorCode::parse, "config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    set_config_value(cfg, key, line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config file '" + path + "'");
  return parse_config(in);
}

FractalModelSpec resolve_model_spec(const RunConfig& cfg, CarpetBetaFit* fit) {
  auto spec = FractalModelSpec::defaults(cfg.family);
  spec.window = cfg.window;
  spec.subdivision = cfg.subdivision;
  spec.graph_file = cfg.graph_file;
  spec.level = cfg.levels.back();
  if (cfg.alpha != "auto") spec.alpha = std::stod(cfg.alpha);
  if (cfg.beta == "fit" || (cfg.beta == "auto" && cfg.family == ModelFamily::pre_carpet))
  {
    CarpetBetaFit f = fit_carpet_beta(std::max(1, cfg.levels.back()));
    spec.beta = f.beta;
    if (fit) *fit = std::move(f);
  }
  else if (cfg.beta != "auto")
    spec.beta = std::stod(cfg.beta);
  spec.validate();
  return spec;
}

}  // namespace hkelab
