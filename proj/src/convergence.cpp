#include "hkelab/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hkelab/format.hpp"

namespace hkelab {

namespace {

Eigen::VectorXd restrict_to(const Eigen::VectorXd& global, const PointSet& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = global(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd extend_from(const Eigen::VectorXd& local, const PointSet& idx, std::size_t n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(idx[i])) = local(static_cast<Eigen::Index>(i));
  return out;
}

double mnorm(const Eigen::VectorXd& v, const std::vector<double>& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i) * v(i) * m[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

}  // namespace

SequenceMember member_from_model(const FractalModelSpec& spec, int level, Model model) {
  SequenceMember m;
  m.level = level;
  m.model = std::move(model);
  m.space = geodesic_space(m.model.graph, 0);
  const double l = spec.contraction;
  if (spec.family == ModelFamily::generic_graph) {
    m.psi = base_scale_function(spec);
    m.volume = base_volume(spec);
  } else {
    m.psi = base_scale_function(spec).rescaled(l, spec.beta, level);
    m.volume = base_volume(spec).rescaled(l, spec.alpha, level);
  }
  m.mesh = m.model.graph.min_edge_length();
  return m;
}

SequenceMember make_member(const FractalModelSpec& spec, int level) {
  FractalModelSpec sp = spec;
  sp.level = level;
  return member_from_model(sp, level, build_member(sp));
}

SpaceSequence make_sequence(const FractalModelSpec& spec, const std::vector<int>& levels, double R,
                            IsometryMode mode) {
  require(!levels.empty(), "sequence needs at least one level");
  require(std::is_sorted(levels.begin(), levels.end()), "levels must ascend");
  SpaceSequence seq;
  for (int n : levels) seq.members.push_back(make_member(spec, n));
  seq.radii.assign(levels.size(), R);
  auto link = [&](const SequenceMember& a, const SequenceMember& b) {
    if (mode == IsometryMode::embedding && !a.model.coords.empty() && !b.model.coords.empty())
      return isometry_from_embedding(a.space, a.model.coords, b.space, b.model.coords);
    return build_approx_isometry(a.space, b.space);
  };
  const SequenceMember& P = seq.members.back();
  for (std::size_t i = 0; i < seq.members.size(); ++i) {
    seq.to_proxy.push_back(i + 1 == seq.members.size() ? identity_isometry(P.space)
                                                       : link(seq.members[i], P));
    if (i + 1 < seq.members.size()) seq.consecutive.push_back(link(seq.members[i], seq.members[i + 1]));
  }
  return seq;
}

Eigen::VectorXd l2_embed(const Eigen::VectorXd& u, const ApproxIsometry& iso,
                         const PointSet& member_ball, const PointSet& proxy_ball) {
  require(static_cast<std::size_t>(u.size()) == iso.g.size(), "embed: function size mismatch");
  std::vector<char> inside(iso.g.size(), 0);
  for (Index y : proxy_ball) inside[y] = 1;
  for (Eigen::Index y = 0; y < u.size(); ++y)
    if (u(y) != 0.0 && !inside[static_cast<std::size_t>(y)])
      fail(ErrorCode::invalid_argument, "embed: function support escapes the proxy ball");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(iso.f.size()));
  for (Index x : member_ball) out(static_cast<Eigen::Index>(x)) = u(static_cast<Eigen::Index>(iso.f[x]));
  return out;
}

double norm_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& embedded,
                const std::vector<double>& proxy_measure, const std::vector<double>& member_measure) {
  return std::abs(mnorm(embedded, member_measure) - mnorm(u, proxy_measure));
}

KernelGap pullback_kernel_gap(const Eigen::MatrixXd& member_kernel, const std::vector<Index>& g,
                              const Eigen::MatrixXd& proxy_kernel, const PointSet& proxy_ball,
                              double t, double member_floor) {
  KernelGap kg;
  for (Index y : proxy_ball)
    for (Index x : proxy_ball) {
      double a = member_kernel(static_cast<Eigen::Index>(g[x]), static_cast<Eigen::Index>(g[y]));
      double b = proxy_kernel(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      kg.gap = std::max(kg.gap, std::abs(a - b));
    }
  kg.reliable = t >= member_floor;
  return kg;
}

std::vector<std::vector<Index>> eigen_clusters(const Eigen::VectorXd& values, double tol) {
  std::vector<std::vector<Index>> out;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (!out.empty()) {
      const double prev = values(static_cast<Eigen::Index>(out.back().back()));
      const double scale = std::max({std::abs(prev), std::abs(values(j)), 1e-300});
      if (std::abs(values(j) - prev) / scale < tol) {
        out.back().push_back(static_cast<Index>(j));
        continue;
      }
    }
    out.push_back({static_cast<Index>(j)});
  }
  return out;
}

std::vector<Index> simple_modes(const Eigen::VectorXd& values, std::size_t count, double tol) {
  std::vector<Index> out;
  for (const auto& c : eigen_clusters(values, tol)) {
    if (out.size() == count) break;
    if (c.size() == 1) out.push_back(c.front());
  }
  return out;
}

EigenGap eigen_data_gap(const SpectralData& member, const SpectralData& proxy,
                        const std::vector<Index>& g, std::size_t J, double cluster_tol) {
  require(J <= member.count() && J <= proxy.count(), "eigen gap: J exceeds spectrum counts");
  EigenGap out;
  // Member eigenfunctions pulled back to proxy interior points via g.
  std::vector<long> slot(member.global_size, -1);
  for (std::size_t i = 0; i < member.interior.size(); ++i) slot[member.interior[i]] = static_cast<long>(i);
  const auto nN = static_cast<Eigen::Index>(proxy.interior.size());
  auto pulled = [&](Eigen::Index j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nN);
    for (Eigen::Index i = 0; i < nN; ++i) {
      long s = slot[g[proxy.interior[static_cast<std::size_t>(i)]]];
      if (s >= 0) v(i) = member.vectors(s, j);
    }
    return v;
  };
  for (std::size_t j = 0; j < J; ++j)
    out.value_gap.push_back(std::abs(member.values(static_cast<Eigen::Index>(j)) -
                                     proxy.values(static_cast<Eigen::Index>(j))));
  out.function_gap.assign(J, std::numeric_limits<double>::quiet_NaN());
  out.clusters = eigen_clusters(proxy.values, cluster_tol);
  for (const auto& c : out.clusters) {
    if (c.front() >= J) break;
    const bool whole = c.back() < member.count();
    if (c.size() == 1) {
      const auto j = static_cast<Eigen::Index>(c.front());
      Eigen::VectorXd a = proxy.vectors.col(j), b = pulled(j);
      out.function_gap[c.front()] =
          std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
      continue;
    }
    if (!whole) continue;
    Eigen::MatrixXd A(nN, static_cast<Eigen::Index>(c.size())), B(nN, static_cast<Eigen::Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k) {
      A.col(static_cast<Eigen::Index>(k)) = proxy.vectors.col(static_cast<Eigen::Index>(c[k]));
      B.col(static_cast<Eigen::Index>(k)) = pulled(static_cast<Eigen::Index>(c[k]));
    }
    Eigen::MatrixXd diff = A * A.transpose() - B * B.transpose();
    out.projector_gap.push_back(diff.cwiseAbs().maxCoeff());
  }
  return out;
}

double mosco_residual(const Eigen::VectorXd& v, double t, const SpectralData& member,
                      const SpectralData& proxy, const ApproxIsometry& iso,
                      const std::vector<double>& member_measure) {
  const std::size_t nN = proxy.global_size, nn = member.global_size;
  require(static_cast<std::size_t>(v.size()) == nN, "mosco: test function size mismatch");
  Eigen::VectorXd Qv = extend_from(semigroup_apply(proxy, t, restrict_to(v, proxy.interior)),
                                   proxy.interior, nN);
  Eigen::VectorXd ev = l2_embed(v, iso, member.interior, proxy.interior);
  Eigen::VectorXd eQv = l2_embed(Qv, iso, member.interior, proxy.interior);
  Eigen::VectorXd Pev = extend_from(semigroup_apply(member, t, restrict_to(ev, member.interior)),
                                    member.interior, nn);
  return mnorm(Pev - eQv, member_measure);
}

LimitMeasure limit_measure_estimate(const SpaceSequence& seq, double R, const VolumeProfile& V,
                                    const std::vector<double>& r_grid, std::size_t member) {
  require(!seq.members.empty(), "limit measure needs a sequence");
  if (member == SIZE_MAX) member = seq.members.size() >= 2 ? seq.members.size() - 2 : 0;
  const SequenceMember& src = seq.members[member];
  const SequenceMember& prx = seq.proxy();
  const ApproxIsometry& iso = seq.to_proxy[member];
  PointSet cb = closed_ball(src.space, src.space.basepoint, R);
  PushforwardMeasure pm = pushforward(src.space.measure, iso.f, prx.space.size(), cb);
  LimitMeasure out;
  out.mass = pm.mass;
  // Centres: charged proxy points well inside the ball.
  PointSet centers;
  const double rmax = r_grid.empty() ? 0.0 : *std::max_element(r_grid.begin(), r_grid.end());
  for (Index y = 0; y < prx.space.size(); ++y)
    if (pm.mass[y] > 0.0 &&
        prx.space.dist(static_cast<Eigen::Index>(prx.space.basepoint), static_cast<Eigen::Index>(y)) + rmax <= R)
      centers.push_back(y);
  if (centers.empty())
    for (Index y = 0; y < prx.space.size(); ++y)
      if (pm.mass[y] > 0.0) centers.push_back(y);
  std::vector<double> radii;
  for (double r : r_grid)
    if (r > src.mesh) radii.push_back(r);
  out.regularity = volume_regularity(prx.space, pm.mass, V, radii, centers);
  return out;
}

bool monotone_nonincreasing(const std::vector<double>& v, std::size_t window) {
  std::size_t start = (window == 0 || window >= v.size()) ? 0 : v.size() - window;
  for (std::size_t i = start; i + 1 < v.size(); ++i)
    if (!(v[i + 1] <= v[i] + 1e-12 * std::max(1.0, std::abs(v[i])))) return false;
  return true;
}

ConvergenceReport convergence_report(const SpaceSequence& seq, const ConvergenceOptions& opt) {
  require(seq.members.size() >= 2, "convergence needs at least one member and a proxy");
  require(seq.radii.size() == seq.members.size(), "one radius per member required");
  require(seq.to_proxy.size() + 1 >= seq.members.size(), "isometries to the proxy missing");
  ConvergenceReport rep;
  const std::size_t nm = seq.members.size() - 1;
  for (std::size_t i = 0; i < nm; ++i) rep.levels.push_back(seq.members[i].level);

  std::vector<SpectralData> specs;
  for (std::size_t i = 0; i <= nm; ++i) {
    const SequenceMember& m = seq.members[i];
    GraphDirichletForm form(m.model.graph);
    specs.push_back(spectrum(form, assemble_part(m.space, m.space.basepoint, seq.radii[i]), 0,
                             opt.spectral));
  }
  const SequenceMember& P = seq.proxy();
  const SpectralData& SN = specs.back();
  const double R = seq.radii.back();
  const std::size_t NN = P.space.size();

  // Test battery on the proxy: ball indicator, two tents, three eigenfunctions.
  std::vector<std::pair<std::string, Eigen::VectorXd>> battery;
  {
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(NN));
    Eigen::VectorXd tent_half = ind, tent_full = ind;
    for (Index y : SN.interior) {
      const double d = P.space.dist(static_cast<Eigen::Index>(P.space.basepoint), static_cast<Eigen::Index>(y));
      ind(static_cast<Eigen::Index>(y)) = 1.0;
      tent_half(static_cast<Eigen::Index>(y)) = std::max(0.0, 1.0 - d / (0.5 * R));
      tent_full(static_cast<Eigen::Index>(y)) = std::max(0.0, 1.0 - d / R);
    }
    battery.push_back({"ball", ind});
    battery.push_back({"tent_R/2", tent_half});
    battery.push_back({"tent_R", tent_full});
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(3, SN.values.size()); ++j)
      battery.push_back({"eigfun" + std::to_string(j + 1), extend_from(SN.vectors.col(j), SN.interior, NN)});
  }

  for (double t : opt.t_values) {
    const std::string ts = "t=" + format_double(t);
    const Eigen::MatrixXd KN = heat_kernel_extended(SN, t);
    for (std::size_t i = 0; i < nm; ++i) {
      const SequenceMember& M = seq.members[i];
      const Eigen::MatrixXd Kn = heat_kernel_extended(specs[i], t);
      KernelGap kg = pullback_kernel_gap(Kn, seq.to_proxy[i].g, KN, SN.interior, t, M.psi(2.0 * M.mesh));
      rep.curves["kernel_" + ts].push_back(kg.gap);
      if (!kg.reliable) rep.unreliable.push_back("kernel_" + ts);
      for (const auto& [name, v] : battery)
        rep.curves["mosco_" + ts + "_" + name].push_back(
            mosco_residual(v, t, specs[i], SN, seq.to_proxy[i], M.space.measure));
    }
  }

  const std::vector<Index> modes = simple_modes(SN.values, opt.modes);
  for (std::size_t i = 0; i < nm; ++i) {
    const SequenceMember& M = seq.members[i];
    for (Index j : modes) {
      double gap = j < specs[i].count()
                       ? std::abs(specs[i].values(static_cast<Eigen::Index>(j)) - SN.values(static_cast<Eigen::Index>(j)))
                       : std::numeric_limits<double>::infinity();
      rep.curves["eigenvalue_mode" + std::to_string(j + 1)].push_back(gap);
    }
    PointSet cb = closed_ball(M.space, M.space.basepoint, seq.radii[i]);
    PushforwardMeasure mu = pushforward(M.space.measure, seq.to_proxy[i].f, NN, cb);
    std::vector<double> nu(NN, 0.0);
    for (Index y : closed_ball(P.space, P.space.basepoint, R)) nu[y] = P.space.measure[y];
    const auto gaps = weak_gap(mu.mass, nu, default_weak_tests(P.space, R));
    const auto names = default_weak_test_names();
    for (std::size_t k = 0; k < gaps.size(); ++k) rep.curves["weak_" + names[k]].push_back(gaps[k]);
    for (const auto& [name, v] : battery) {
      Eigen::VectorXd e = l2_embed(v, seq.to_proxy[i], specs[i].interior, SN.interior);
      rep.curves["norm_" + name].push_back(norm_gap(v, e, P.space.measure, M.space.measure));
    }
  }
  const double diam_proxy = diameter(P.space);
  for (std::size_t i = 0; i < nm; ++i)
    rep.curves["diameter"].push_back(std::abs(diameter(seq.members[i].space) - diam_proxy));

  for (const auto& [name, v] : rep.curves) rep.monotone[name] = monotone_nonincreasing(v, opt.verdict_window);
  std::sort(rep.unreliable.begin(), rep.unreliable.end());
  rep.unreliable.erase(std::unique(rep.unreliable.begin(), rep.unreliable.end()), rep.unreliable.end());
  return rep;
}

}  // namespace hkelab
