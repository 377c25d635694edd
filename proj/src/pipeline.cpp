#include "hkelab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "hkelab/convergence.hpp"
#include "hkelab/cubes.hpp"
#include "hkelab/form.hpp"
#include "hkelab/format.hpp"
#include "hkelab/hke.hpp"
#include "hkelab/isometry.hpp"
#include "json.hpp"

namespace hkelab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Tolerances for the exact semigroup identities.
constexpr double kSymmetryTol = 1e-12;
constexpr double kChapmanTol = 1e-8;
constexpr double kMarkovTol = 1e-10;
constexpr std::size_t kPartialEigenpairs = 64;

struct Curve {
  std::string x_label, y_label;
  std::vector<std::pair<double, double>> points;
};

struct Context {
  RunConfig cfg;
  FractalModelSpec spec;
  std::optional<CarpetBetaFit> beta_fit;
  fs::path reports;
  RunManifest* manifest = nullptr;

  SpaceSequence seq;     // members live here from the first stage on
  bool aligned = false;  // isometries filled in
  std::vector<SpectralData> ball, full;
  std::vector<std::vector<double>> bulk_grid;  // empty when the bulk regime is empty
  std::vector<std::string> bulk_note;
  std::map<std::string, Curve> curves;

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = reports / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) fail(ErrorCode::io, "cannot write " + p.string());
    auto& files = manifest->files;
    auto it = std::find_if(files.begin(), files.end(), [&](const ManifestFile& f) { return f.path == rel; });
    const std::string fp = hex64(fnv1a64(content));
    if (it == files.end())
      files.push_back({rel, fp});
    else
      it->fingerprint = fp;
  }
  void write_json(const std::string& rel, const json& j) { write(rel, j.dump(1) + "\n"); }
  void check(const std::string& name, bool ok) {
    auto [it, fresh] = manifest->checks.emplace(name, ok);
    if (!fresh) it->second = it->second && ok;
  }
  std::string level_tag(std::size_t i) const { return "level_" + std::to_string(seq.members[i].level); }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const FitReport& r, const MetricMeasureSpace& s) {
  json c = json::object(), g = json::object(), w = json::array();
  for (const auto& [k, v] : r.constants) c[k] = num(v);
  for (const auto& [k, v] : r.grid) g[k] = num(v);
  for (const auto& x : r.witnesses)
    w.push_back({{"what", x.what},
                 {"t", num(x.t)},
                 {"x", x.x < s.size() ? s.ids[x.x] : std::to_string(x.x)},
                 {"y", x.y < s.size() ? s.ids[x.y] : std::to_string(x.y)},
                 {"value", num(x.value)}});
  json prof = json::array();
  for (double v : r.profile) prof.push_back(num(v));
  return {{"constants", c}, {"grid", g}, {"witnesses", w}, {"profile", prof}, {"pass", r.pass}};
}

json spectrum_json(const SpectralData& sp, std::size_t shown) {
  json vals = json::array();
  for (Eigen::Index j = 0; j < sp.values.size() && static_cast<std::size_t>(j) < shown; ++j) vals.push_back(sp.values(j));
  return {{"interior", sp.interior_size()}, {"eigenpairs", sp.count()},  {"complete", sp.complete},
          {"solver", sp.solver},            {"gram_error", num(sp.gram_error)}, {"residual", num(sp.residual)},
          {"eigenvalues", vals}};
}

json semigroup_json(const SemigroupCheck& c) {
  return {{"symmetry", c.symmetry},
          {"chapman_kolmogorov", c.chapman_kolmogorov},
          {"contraction_excess", c.contraction_excess},
          {"conservation", c.full ? num(c.conservation) : json(nullptr)},
          {"markov_excess", c.markov_excess},
          {"min_entry", c.min_entry}};
}

bool semigroup_ok(const SemigroupCheck& c) {
  return c.symmetry <= kSymmetryTol && c.chapman_kolmogorov <= kChapmanTol && c.contraction_excess <= kMarkovTol &&
         (!c.full || c.conservation <= kMarkovTol) && c.markov_excess <= kMarkovTol;
}

SpectralData solve(const GraphDirichletForm& form, const BallPart& part, const RunConfig& cfg) {
  SpectralOptions opt;
  opt.dense_cap = cfg.dense_cap;
  const std::size_t n = part.interior.size();
  const std::size_t k = n <= cfg.dense_cap ? 0 : std::min(kPartialEigenpairs, n - 1);
  return spectrum(form, part, k, opt);
}

std::string describe(const std::exception& e) { return e.what(); }

// ---------------------------------------------------------------- stages

void stage_generate(Context& c) {
  json levels = json::array();
  for (int n : c.cfg.levels) {
    FractalModelSpec sp = c.spec;
    sp.level = n;
    Model m = build_member(sp);
    const std::string tag = "level_" + std::to_string(n);
    std::ostringstream g;
    write_graph(g, m.graph);
    c.write("models/" + tag + ".graph", g.str());
    if (!m.coords.empty()) {
      std::ostringstream xy;
      write_coordinates(xy, m.graph, m.coords);
      c.write("models/" + tag + ".coords.csv", xy.str());
    }
    levels.push_back({{"level", n},
                      {"vertices", m.graph.vertex_count()},
                      {"edges", m.graph.edge_count()},
                      {"total_measure", m.graph.total_measure()},
                      {"min_edge_length", m.graph.min_edge_length()}});
    c.seq.members.push_back(member_from_model(sp, n, std::move(m)));
  }
  json j = {{"family", family_name(c.spec.family)},
            {"contraction", c.spec.contraction},
            {"alpha", c.spec.alpha},
            {"beta", c.spec.beta},
            {"subdivision", c.spec.subdivision},
            {"window", c.spec.window},
            {"levels", levels}};
  if (c.beta_fit)
    j["beta_fit"] = {{"resistance", c.beta_fit->resistance}, {"rho", c.beta_fit->rho}, {"beta", c.beta_fit->beta}};
  c.write_json("models.json", j);
}

void stage_geodesic(Context& c) {
  json levels = json::array();
  for (std::size_t i = 0; i < c.seq.members.size(); ++i) {
    const auto& m = c.seq.members[i];
    const auto& s = m.space;
    const double diam = diameter(s);
    const TriangleCheck tri = check_triangle(s, 1e-12, 20000, c.cfg.seed);
    c.check("triangle_inequality", tri.ok);
    json level = {{"level", m.level},
                  {"points", s.size()},
                  {"basepoint", s.ids[s.basepoint]},
                  {"diameter", diam},
                  {"mesh", m.mesh},
                  {"triangle", {{"ok", tri.ok},
                                {"exhaustive", tri.exhaustive},
                                {"triples", tri.triples},
                                {"worst_violation", tri.worst_violation},
                                {"witness", {s.ids[tri.x], s.ids[tri.y], s.ids[tri.z]}}}}};

    const double lo = 2.0 * m.mesh, hi = std::min(c.cfg.radius, diam / 2.0);
    if (lo < hi) {
      const PointSet centers = s.size() <= 500 ? PointSet{} : epsilon_net(s, diam / 16.0, c.cfg.seed);
      const auto reg = volume_regularity(s, VolumeProfile{m.volume, c.cfg.cv_bound}, log_grid(lo, hi, 6), centers);
      c.check("volume_regularity", reg.pass);
      level["volume_regularity"] = {{"measured_cv", num(reg.measured_cv)}, {"cv_bound", c.cfg.cv_bound},
                                    {"gamma", num(reg.gamma)},             {"witness_x", s.ids[reg.witness_x]},
                                    {"witness_r", reg.witness_r},          {"r_min", lo},
                                    {"r_max", hi},                         {"pass", reg.pass}};
    } else {
      level["volume_regularity"] = {{"skipped", "no radii between twice the mesh and min(R, diam/2)"}};
    }

    const auto cubes = christ_cubes(s, c.cfg.cube_delta, c.cfg.cube_depth);
    const auto ver = verify_cubes(s, cubes);
    c.check("christ_cubes", ver.ok());
    json counts = json::array();
    for (const auto& l : cubes.levels) counts.push_back(l.cubes.size());
    level["cubes"] = {{"delta", cubes.delta}, {"a0", cubes.a0},          {"a1", cubes.a1},
                      {"cubes_per_level", counts}, {"partition", ver.partition}, {"sandwich", ver.sandwich},
                      {"detail", ver.detail}};
    levels.push_back(level);
  }
  c.write_json("geodesic.json", {{"levels", levels}});
}

void write_map(Context& c, const std::string& rel, const SequenceMember& a, const SequenceMember& b,
               const ApproxIsometry& iso) {
  std::ostringstream out;
  write_isometry(out, a.space, b.space, iso);
  c.write(rel + ".csv", out.str());
  std::ostringstream inv;
  inv << "target_id,source_id\n";
  for (Index y = 0; y < b.space.size(); ++y) inv << b.space.ids[y] << ',' << a.space.ids[iso.g[y]] << '\n';
  c.write(rel + ".inverse.csv", inv.str());
}

json iso_json(const SequenceMember& a, const SequenceMember& b, const ApproxIsometry& iso, const std::string& file) {
  return {{"source_level", a.level},
          {"target_level", b.level},
          {"maps", file},
          {"epsilon", iso.epsilon},
          {"distortion_f", iso.distortion_f},
          {"distortion_g", iso.distortion_g},
          {"net_radius", iso.net_radius},
          {"net_radius_g", iso.net_radius_g},
          {"roundtrip_source", iso.roundtrip_source},
          {"roundtrip_target", iso.roundtrip_target},
          {"basepoint_preserved", iso.basepoint_preserved},
          {"gh_upper_bound", correspondence_distortion(a.space, b.space, iso) / 2.0}};
}

void stage_isometries(Context& c, StageRecord& rec) {
  if (c.seq.members.size() < 2) {
    rec.status = "skipped";
    rec.diagnostics = "a single level has no sequence to align";
    return;
  }
  SpaceSequence& seq = c.seq;
  seq.radii.assign(c.seq.members.size(), c.cfg.radius);
  const bool embed = c.cfg.isometry == "embedding";
  auto link = [&](const SequenceMember& a, const SequenceMember& b) {
    if (embed && !a.model.coords.empty() && !b.model.coords.empty())
      return isometry_from_embedding(a.space, a.model.coords, b.space, b.model.coords);
    return build_approx_isometry(a.space, b.space);
  };
  const std::size_t last = c.seq.members.size() - 1;
  json consecutive = json::array(), to_proxy = json::array();
  Curve eps{"level", "epsilon", {}};
  for (std::size_t i = 0; i < last; ++i) {
    const auto& a = c.seq.members[i];
    const auto& b = c.seq.members[i + 1];
    auto iso = link(a, b);
    const std::string rel = "isometries/" + c.level_tag(i) + "_to_" + c.level_tag(i + 1);
    write_map(c, rel, a, b, iso);
    consecutive.push_back(iso_json(a, b, iso, rel + ".csv"));
    eps.points.emplace_back(a.level, iso.epsilon);
    c.check("isometry_basepoints", iso.basepoint_preserved);
    seq.consecutive.push_back(std::move(iso));
  }
  for (std::size_t i = 0; i < last; ++i) {
    const auto& a = c.seq.members[i];
    const auto& p = c.seq.members[last];
    ApproxIsometry iso = i + 1 == last ? seq.consecutive[i] : link(a, p);
    const std::string rel = "isometries/" + c.level_tag(i) + "_to_" + c.level_tag(last);
    if (i + 1 != last) write_map(c, rel, a, p, iso);
    to_proxy.push_back(iso_json(a, p, iso, rel + ".csv"));
    c.check("isometry_basepoints", iso.basepoint_preserved);
    seq.to_proxy.push_back(std::move(iso));
  }
  seq.to_proxy.push_back(identity_isometry(c.seq.members[last].space));
  c.curves["isometry_epsilon"] = eps;
  c.write_json("isometries.json", {{"mode", embed ? "embedding" : "search"},
                                   {"consecutive", consecutive},
                                   {"to_proxy", to_proxy}});
  c.aligned = true;
}

void stage_spectra(Context& c) {
  json levels = json::array();
  Curve weyl_c{"level", "C_weyl", {}};
  for (std::size_t i = 0; i < c.seq.members.size(); ++i) {
    const auto& m = c.seq.members[i];
    GraphDirichletForm form(m.model.graph);
    c.ball.push_back(solve(form, assemble_part(m.space, m.space.basepoint, c.cfg.radius), c.cfg));
    c.full.push_back(solve(form, full_part(m.space), c.cfg));
    const auto& b = c.ball.back();
    const auto& f = c.full.back();
    const bool dominated = eigenvalues_dominated(f, b);
    c.check("eigenvalue_domination", dominated);
    const auto weyl = weyl_check(b, m.psi, c.cfg.radius);
    c.check("weyl_finite", weyl.pass);
    weyl_c.points.emplace_back(m.level, weyl.get("C_weyl"));
    Curve prof{"j", "lambda_j_psi_R_over_j", {}}, vals{"j", "lambda_j", {}};
    for (std::size_t j = 0; j < weyl.profile.size(); ++j) {
      prof.points.emplace_back(j + 1, weyl.profile[j]);
      vals.points.emplace_back(j + 1, b.values(static_cast<Eigen::Index>(j)));
    }
    c.curves["weyl_" + c.level_tag(i)] = prof;
    c.curves["eigenvalues_" + c.level_tag(i)] = vals;
    levels.push_back({{"level", m.level},
                      {"ball", spectrum_json(b, 20)},
                      {"full", spectrum_json(f, 20)},
                      {"radius", c.cfg.radius},
                      {"eigenvalue_domination", dominated},
                      {"weyl", fit_json(weyl, m.space)}});
  }
  c.curves["weyl_C"] = weyl_c;
  c.write_json("spectra.json", {{"levels", levels}});
}

void stage_kernels(Context& c) {
  json levels = json::array();
  for (std::size_t i = 0; i < c.seq.members.size(); ++i) {
    const auto& m = c.seq.members[i];
    const auto& f = c.full[i];
    const auto& b = c.ball[i];
    json level = {{"level", m.level}};
    json ids = json::array();
    if (f.complete && b.complete) {
      std::uint64_t seed = c.cfg.seed;
      for (double t : c.cfg.t_values) {
        const auto sf = semigroup_identities(f, t, t, true, seed);
        const auto sb = semigroup_identities(b, t, t, b.interior_size() == m.space.size(), seed);
        c.check("semigroup_identities", semigroup_ok(sf) && semigroup_ok(sb));
        const Eigen::VectorXd defect = conservativeness_defect(b, t);
        ids.push_back({{"t", t},
                       {"full", semigroup_json(sf)},
                       {"ball", semigroup_json(sb)},
                       {"ball_conservativeness_defect_max", defect.maxCoeff()}});
      }
      level["semigroup"] = ids;
    } else {
      level["semigroup"] = {{"skipped", "partial spectrum"},
                            {"truncation_bound", truncation_bound(f, c.cfg.t_values.front())}};
    }

    const double diam = diameter(m.space);
    std::vector<double> grid;
    std::string note;
    try {
      grid = bulk_t_grid(m.psi, m.mesh, diam, c.cfg.t_grid_points);
    } catch (const Error& e) {
      note = e.what();
    }
    c.bulk_grid.push_back(grid);
    c.bulk_note.push_back(note);
    if (!grid.empty()) {
      std::vector<double> diag;
      const auto bp = static_cast<Eigen::Index>(m.space.basepoint);
      for (double t : grid) diag.push_back(heat_kernel_diagonal(f, t)(bp));
      const auto fit = ondiag_fit(grid, diag);
      Curve cv{"log_t", "log_p", {}};
      for (std::size_t k = 0; k < grid.size(); ++k) cv.points.emplace_back(fit.log_t[k], fit.log_p[k]);
      c.curves["ondiag_" + c.level_tag(i)] = cv;
      level["ondiag"] = {{"vertex", m.space.ids[m.space.basepoint]},
                         {"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"t", grid},
                         {"truncation_bound", truncation_bound(f, grid.front())}};
    } else {
      level["ondiag"] = {{"skipped", note}};
    }
    levels.push_back(level);
  }
  c.write_json("kernels.json", {{"levels", levels}});
}

void stage_hke(Context& c) {
  json levels = json::array();
  Curve c1{"level", "C_1", {}}, ce{"level", "C_eig", {}}, th{"level", "Theta", {}};
  for (std::size_t i = 0; i < c.seq.members.size(); ++i) {
    const auto& m = c.seq.members[i];
    const auto& grid = c.bulk_grid[i];
    if (grid.empty()) {
      levels.push_back({{"level", m.level}, {"skipped", c.bulk_note[i]}});
      continue;
    }
    HkeOptions ho;
    ho.c2 = c.cfg.c2;
    ho.c1_budget = c.cfg.c1_budget;
    const auto bounds = hke_bounds_check(m.space, c.full[i], m.volume, m.psi, grid, ho);
    const auto eig = eigfun_sup_check(c.ball[i], m.volume, m.psi, grid);
    HolderOptions hopt;
    hopt.budget = c.cfg.holder_budget;
    hopt.samples = c.cfg.holder_samples;
    hopt.seed = c.cfg.seed;
    const auto hold = holder_fit(m.space, c.full[i], m.volume, m.psi, grid, hopt);
    c.check("hke_bounds", bounds.pass);
    c.check("holder", hold.pass);
    c1.points.emplace_back(m.level, bounds.get("C_1"));
    ce.points.emplace_back(m.level, eig.get("C_eig"));
    th.points.emplace_back(m.level, hold.get("Theta"));
    levels.push_back({{"level", m.level},
                      {"hke", fit_json(bounds, m.space)},
                      {"eigenfunction_sup", fit_json(eig, m.space)},
                      {"holder", fit_json(hold, m.space)}});
  }
  json ratios = json::array();
  for (std::size_t k = 1; k < c1.points.size(); ++k) {
    const double r = c1.points[k].second / c1.points[k - 1].second;
    ratios.push_back(num(r));
    c.check("hke_C1_stable", r >= 0.5 && r <= 2.0);
  }
  c.curves["hke_C1"] = c1;
  c.curves["eigfun_C"] = ce;
  c.curves["holder_theta"] = th;
  c.write_json("hke.json", {{"levels", levels}, {"C1_ratios", ratios}});
}

void stage_convergence(Context& c, StageRecord& rec) {
  if (!c.aligned) {
    rec.status = "skipped";
    rec.diagnostics = "needs at least two levels";
    return;
  }
  ConvergenceOptions opt;
  opt.t_values = c.cfg.t_values;
  opt.modes = c.cfg.modes;
  opt.spectral.dense_cap = c.cfg.dense_cap;
  const auto rep = convergence_report(c.seq, opt);

  json curves = json::object(), mono = json::object();
  for (const auto& [name, v] : rep.curves) {
    json arr = json::array();
    Curve cv{"level", "gap", {}};
    for (std::size_t k = 0; k < v.size(); ++k) {
      arr.push_back(num(v[k]));
      cv.points.emplace_back(rep.levels[k], v[k]);
    }
    curves[name] = arr;
    c.curves[name] = cv;
  }
  for (const auto& [name, ok] : rep.monotone) {
    mono[name] = ok;
    const bool flagged = std::find(rep.unreliable.begin(), rep.unreliable.end(), name) != rep.unreliable.end();
    if (!flagged) c.check("convergence_monotone", ok);
  }

  const auto& seq = c.seq;
  const std::size_t src = seq.members.size() - 2;
  const double lo = 2.0 * seq.members[src].mesh, hi = c.cfg.radius / 2.0;
  json limit;
  if (lo < hi) {
    const auto lm = limit_measure_estimate(seq, c.cfg.radius, VolumeProfile{seq.proxy().volume, c.cfg.cv_bound},
                                           log_grid(lo, hi, 6));
    double total = 0.0;
    for (double x : lm.mass) total += x;
    limit = {{"from_level", seq.members[src].level},
             {"total_mass", total},
             {"measured_cv", num(lm.regularity.measured_cv)},
             {"witness_x", seq.proxy().space.ids[lm.regularity.witness_x]},
             {"witness_r", lm.regularity.witness_r},
             {"pass", lm.regularity.pass}};
  } else {
    limit = {{"skipped", "no radii between twice the mesh and R/2"}};
  }
  c.write_json("convergence.json", {{"levels", rep.levels},
                                    {"proxy_level", seq.proxy().level},
                                    {"radius", c.cfg.radius},
                                    {"curves", curves},
                                    {"monotone", mono},
                                    {"unreliable", rep.unreliable},
                                    {"limit_measure", limit}});
}

// ---------------------------------------------------------------- manifest

json manifest_json(const RunManifest& m) {
  json stages = json::array(), files = json::array(), checks = json::object();
  for (const auto& s : m.stages)
    stages.push_back({{"name", s.name}, {"status", s.status}, {"inputs_hash", s.inputs_hash}, {"diagnostics", s.diagnostics}});
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"fingerprint", f.fingerprint}});
  for (const auto& [k, v] : m.checks) checks[k] = v;
  return {{"config_hash", m.config_hash}, {"stages", stages}, {"files", files},
          {"checks", checks},             {"complete", m.complete}};
}

std::string chained_hash(const RunManifest& m) {
  std::string acc = m.config_hash;
  for (const auto& f : m.files) acc += f.path + ":" + f.fingerprint + ";";
  return hex64(fnv1a64(acc));
}

void finalize(Context& c) {
  json curves = json::object();
  for (const auto& [name, cv] : c.curves) {
    json pts = json::array();
    for (const auto& [x, y] : cv.points) pts.push_back({num(x), num(y)});
    curves[name] = {{"x", cv.x_label}, {"y", cv.y_label}, {"points", pts}};
  }
  c.write_json("curves.json", curves);
  auto& m = *c.manifest;
  m.complete = std::all_of(m.stages.begin(), m.stages.end(),
                           [](const StageRecord& s) { return s.status == "done" || s.status == "skipped"; });
  // The manifest lists itself without a fingerprint.
  std::ofstream(c.reports / "manifest.json", std::ios::binary) << manifest_json(m).dump(1) << "\n";
  json timing = json::object();
  for (const auto& s : m.stages) timing[s.name] = s.seconds;
  std::ofstream(fs::path(m.run_dir) / "timing.json", std::ios::binary) << timing.dump(1) << "\n";
}

json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, p.string() + ": " + e.what());
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names{"generate", "geodesic", "isometries", "spectra",
                                              "kernels",  "hke",      "convergence"};
  return names;
}

bool RunManifest::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

std::string run_directory(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / cfg.hash()).string(); }

RunManifest load_manifest(const std::string& run_dir) {
  const json j = read_json(fs::path(run_dir) / "reports" / "manifest.json");
  RunManifest m;
  try {
    m.config_hash = j.at("config_hash").get<std::string>();
    m.run_dir = run_dir;
    for (const auto& s : j.at("stages"))
      m.stages.push_back({s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                          s.at("inputs_hash").get<std::string>(), s.at("diagnostics").get<std::string>(), 0.0});
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("fingerprint").get<std::string>()});
    for (const auto& [k, v] : j.at("checks").items()) m.checks[k] = v.get<bool>();
    m.complete = j.at("complete").get<bool>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "malformed manifest in " + run_dir + ": " + e.what());
  }
  return m;
}

RunManifest run_pipeline(const RunConfig& cfg, const PipelineOptions& opt) {
  cfg.validate();
  const auto& names = pipeline_stages();
  std::size_t stop = names.size();
  if (!opt.stop_after.empty()) {
    auto it = std::find(names.begin(), names.end(), opt.stop_after);
    if (it == names.end()) fail(ErrorCode::invalid_argument, "unknown stage '" + opt.stop_after + "'");
    stop = static_cast<std::size_t>(it - names.begin()) + 1;
  }

  const std::string dir = run_directory(cfg);
  const fs::path reports = fs::path(dir) / "reports";
  if (fs::exists(reports / "manifest.json")) {
    RunManifest old = load_manifest(dir);
    const bool covers = old.complete || (stop < names.size() && old.stages.size() == names.size() &&
                                         (old.stages[stop - 1].status == "done" ||
                                          old.stages[stop - 1].status == "skipped"));
    if (covers && old.config_hash == cfg.hash()) {
      old.reused = true;
      return old;
    }
  }
  fs::remove_all(reports);
  fs::create_directories(reports);

  RunManifest man;
  man.config_hash = cfg.hash();
  man.run_dir = dir;
  for (const auto& n : names) man.stages.push_back({n, "not_run", "", "", 0.0});

  Context c;
  c.cfg = cfg;
  c.reports = reports;
  c.manifest = &man;
  c.write("config.cfg", cfg.canonical());

  using Stage = std::function<void(Context&, StageRecord&)>;
  const std::vector<Stage> run{
      [](Context& x, StageRecord&) { stage_generate(x); },  [](Context& x, StageRecord&) { stage_geodesic(x); },
      stage_isometries,                                    [](Context& x, StageRecord&) { stage_spectra(x); },
      [](Context& x, StageRecord&) { stage_kernels(x); },   [](Context& x, StageRecord&) { stage_hke(x); },
      stage_convergence};

  for (std::size_t k = 0; k < stop; ++k) {
    StageRecord& rec = man.stages[k];
    rec.inputs_hash = chained_hash(man);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<ErrorCode> code;
    try {
      if (k == 0) {
        CarpetBetaFit fit;
        c.spec = resolve_model_spec(cfg, &fit);
        if (!fit.resistance.empty()) c.beta_fit = fit;
      }
      rec.status = "done";
      run[k](c, rec);
    } catch (const Error& e) {
      code = e.code();
      rec.diagnostics = describe(e);
    } catch (const std::exception& e) {
      code = ErrorCode::internal;
      rec.diagnostics = describe(e);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (code) {
      rec.status = "failed";
      json marker = {{"stage", rec.name}, {"inputs_hash", rec.inputs_hash}, {"diagnostics", rec.diagnostics}};
      c.write_json("FAILED_STAGE.json", marker);
      finalize(c);
      throw StageError(*code, rec.name, rec.inputs_hash,
                       "stage '" + rec.name + "' failed (inputs " + rec.inputs_hash + "): " + rec.diagnostics);
    }
  }
  finalize(c);
  return man;
}

std::vector<std::string> curve_names(const std::string& run_dir) {
  const json j = read_json(fs::path(run_dir) / "reports" / "curves.json");
  std::vector<std::string> out;
  for (const auto& [k, v] : j.items()) out.push_back(k);
  return out;
}

void emit_plot_data(const std::string& run_dir, const std::string& curve, std::ostream& out) {
  const json j = read_json(fs::path(run_dir) / "reports" / "curves.json");
  if (!j.contains(curve)) fail(ErrorCode::invalid_argument, "unknown curve '" + curve + "'");
  const json& cv = j.at(curve);
  out << cv.at("x").get<std::string>() << ',' << cv.at("y").get<std::string>() << '\n';
  for (const auto& p : cv.at("points")) {
    auto cell = [](const json& v) { return v.is_null() ? std::string("nan") : format_double(v.get<double>()); };
    out << cell(p[0]) << ',' << cell(p[1]) << '\n';
  }
}

// ---------------------------------------------------------------- verify

namespace {

std::vector<Index> read_map(const fs::path& p, const MetricMeasureSpace& from, const MetricMeasureSpace& to) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<Index> map(from.size(), SIZE_MAX);
  auto index = [](const MetricMeasureSpace& s) {
    std::map<std::string, Index> idx;
    for (Index i = 0; i < s.size(); ++i) idx[s.ids[i]] = i;
    return idx;
  };
  const auto fi = index(from), ti = index(to);
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    const auto a = fi.find(line.substr(0, comma));
    const auto b = ti.find(line.substr(comma + 1));
    if (comma == std::string::npos || a == fi.end() || b == ti.end())
      fail(ErrorCode::parse, p.string() + ": bad map line '" + line + "'");
    map[a->second] = b->second;
  }
  for (Index v : map)
    if (v == SIZE_MAX) fail(ErrorCode::parse, p.string() + ": map is not total");
  return map;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

VerifyResult verify_run(const std::string& run_dir) {
  VerifyResult res;
  const fs::path reports = fs::path(run_dir) / "reports";
  const RunManifest man = load_manifest(run_dir);
  auto note = [&](bool ok, const std::string& what) {
    ++res.checked;
    res.ok = res.ok && ok;
    res.lines.push_back((ok ? "ok       " : "MISMATCH ") + what);
  };

  for (const auto& f : man.files) {
    const fs::path p = reports / f.path;
    const bool present = fs::exists(p);
    note(present && hex64(fnv1a64(slurp(p))) == f.fingerprint, "fingerprint " + f.path);
  }

  const RunConfig cfg = load_config((reports / "config.cfg").string());
  note(cfg.hash() == man.config_hash, "config hash " + man.config_hash);
  FractalModelSpec spec = resolve_model_spec(cfg);

  std::map<int, SequenceMember> members;
  auto member = [&](int level) -> const SequenceMember& {
    auto it = members.find(level);
    if (it != members.end()) return it->second;
    const fs::path gp = reports / "models" / ("level_" + std::to_string(level) + ".graph");
    Model m;
    m.graph = read_graph_file(gp.string());
    FractalModelSpec sp = spec;
    sp.level = level;
    return members.emplace(level, member_from_model(sp, level, std::move(m))).first->second;
  };

  if (fs::exists(reports / "isometries.json")) {
    const json iso = read_json(reports / "isometries.json");
    for (const char* kind : {"consecutive", "to_proxy"})
      for (const auto& e : iso.at(kind)) {
        const auto& a = member(e.at("source_level").get<int>());
        const auto& b = member(e.at("target_level").get<int>());
        std::string file = e.at("maps").get<std::string>();
        ApproxIsometry rec;
        rec.f = read_map(reports / file, a.space, b.space);
        file.replace(file.size() - 4, 4, ".inverse.csv");
        rec.g = read_map(reports / file, b.space, a.space);
        measure_isometry(a.space, b.space, rec);
        note(close(rec.epsilon, e.at("epsilon").get<double>(), 1e-12),
             std::string("isometry epsilon ") + kind + " " + std::to_string(a.level) + "->" +
                 std::to_string(b.level) + " = " + format_double(rec.epsilon));
      }
  }

  if (fs::exists(reports / "hke.json")) {
    const json hk = read_json(reports / "hke.json");
    for (const auto& lv : hk.at("levels")) {
      if (!lv.contains("hke")) continue;
      const auto& m = member(lv.at("level").get<int>());
      SpectralOptions so;
      so.dense_cap = cfg.dense_cap;
      GraphDirichletForm form(m.model.graph);
      const std::size_t n = m.space.size();
      const auto sp = spectrum(form, full_part(m.space), n <= cfg.dense_cap ? 0 : std::min(kPartialEigenpairs, n - 1), so);
      const json& c = lv.at("hke").at("constants");
      const double c2 = c.at("c_2").get<double>(), c3 = c.at("c_3").get<double>();
      std::map<std::string, Index> idx;
      for (Index i = 0; i < n; ++i) idx[m.space.ids[i]] = i;
      for (const auto& w : lv.at("hke").at("witnesses")) {
        if (w.at("value").is_null()) continue;
        const double t = w.at("t").get<double>();
        const Index x = idx.at(w.at("x").get<std::string>()), y = idx.at(w.at("y").get<std::string>());
        const double p = heat_kernel(sp, t)(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
        const double v = m.volume(m.psi.inverse(t));
        const std::string what = w.at("what").get<std::string>();
        double value;
        if (what == "upper")
          value = p * v * std::exp(c2 * t * phi_transform(m.psi, c3 * m.space.dist(x, y) / t));
        else
          value = 1.0 / (p * v);
        note(close(value, w.at("value").get<double>(), 1e-9),
             "hke " + what + " witness level " + std::to_string(m.level) + " = " + format_double(value));
      }
    }
  }
  return res;
}

}  // namespace hkelab
