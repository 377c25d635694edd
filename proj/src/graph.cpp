#include "hkelab/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "hkelab/format.hpp"

namespace hkelab {

WeightedGraph::WeightedGraph(std::vector<std::string> ids,
                             std::vector<double> measure,
                             std::vector<Edge> edges)
    : ids_(std::move(ids)), measure_(std::move(measure)), edges_(std::move(edges)) {
  if (ids_.size() != measure_.size())
    fail(ErrorCode::validation, "vertex id and measure counts differ");
  for (Index i = 0; i < ids_.size(); ++i) {
    if (!lookup_.emplace(ids_[i], i).second)
      fail(ErrorCode::validation, "duplicate vertex id '" + ids_[i] + "'");
    if (!(measure_[i] > 0.0) || !std::isfinite(measure_[i]))
      fail(ErrorCode::validation,
           "vertex '" + ids_[i] + "' has non-positive measure");
  }
  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges_) {
    if (e.a >= ids_.size() || e.b >= ids_.size())
      fail(ErrorCode::validation, "edge endpoint out of range");
    if (e.a == e.b)
      fail(ErrorCode::validation, "self-loop at vertex '" + ids_[e.a] + "'");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      fail(ErrorCode::validation, "edge " + ids_[e.a] + "-" + ids_[e.b] +
                                      " has non-positive length");
    if (!(e.conductance > 0.0) || !std::isfinite(e.conductance))
      fail(ErrorCode::validation, "edge " + ids_[e.a] + "-" + ids_[e.b] +
                                      " has non-positive conductance");
    auto key = std::minmax(e.a, e.b);
    if (!seen.emplace(key.first, key.second).second)
      fail(ErrorCode::validation,
           "duplicate edge " + ids_[e.a] + "-" + ids_[e.b]);
  }
  build_adjacency();
}

void WeightedGraph::build_adjacency() {
  adjacency_.assign(ids_.size(), {});
  for (const Edge& e : edges_) {
    adjacency_[e.a].push_back({e.b, e.length, e.conductance});
    adjacency_[e.b].push_back({e.a, e.length, e.conductance});
  }
}

Index WeightedGraph::index_of(const std::string& id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) fail(ErrorCode::invalid_argument, "unknown vertex '" + id + "'");
  return it->second;
}

double WeightedGraph::total_measure() const {
  double s = 0.0;
  for (double m : measure_) s += m;
  return s;
}

double WeightedGraph::min_edge_length() const {
  double best = std::numeric_limits<double>::infinity();
  for (const Edge& e : edges_) best = std::min(best, e.length);
  return best;
}

std::vector<PointSet> WeightedGraph::components() const {
  std::vector<int> comp(ids_.size(), -1);
  std::vector<PointSet> out;
  for (Index s = 0; s < ids_.size(); ++s) {
    if (comp[s] >= 0) continue;
    PointSet members{s};
    comp[s] = static_cast<int>(out.size());
    for (std::size_t head = 0; head < members.size(); ++head) {
      for (const Neighbor& nb : adjacency_[members[head]]) {
        if (comp[nb.vertex] < 0) {
          comp[nb.vertex] = comp[s];
          members.push_back(nb.vertex);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

void WeightedGraph::require_connected() const {
  if (ids_.empty()) fail(ErrorCode::validation, "graph has no vertices");
  auto comps = components();
  if (comps.size() == 1) return;
  // Report the smallest component; that is usually the stray piece.
  const PointSet* worst = &comps[0];
  for (const auto& c : comps)
    if (c.size() < worst->size()) worst = &c;
  std::ostringstream msg;
  msg << "graph is disconnected (" << comps.size()
      << " components); offending component:";
  std::size_t shown = 0;
  for (Index v : *worst) {
    if (shown++ == 20) {
      msg << " ...";
      break;
    }
    msg << ' ' << ids_[v];
  }
  fail(ErrorCode::validation, msg.str());
}

WeightedGraph WeightedGraph::with_measure(std::vector<double> measure) const {
  return WeightedGraph(ids_, std::move(measure), edges_);
}

WeightedGraph WeightedGraph::with_edges(std::vector<Edge> edges) const {
  return WeightedGraph(ids_, measure_, std::move(edges));
}

namespace {

double parse_number(const std::string& tok, std::size_t line, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail(ErrorCode::parse, "line " + std::to_string(line) + ": invalid " +
                               what + " '" + tok + "'");
  return v;
}

}  // namespace

WeightedGraph read_graph(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<double> measure;
  std::unordered_map<std::string, Index> lookup;
  struct PendingEdge {
    std::string a, b;
    double length, conductance;
    std::size_t line;
  };
  std::vector<PendingEdge> pending;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (tok[0] == "V") {
      if (tok.size() != 3) fail(ErrorCode::parse, where + "expected 'V <id> <measure>'");
      double m = parse_number(tok[2], line, "measure");
      if (!(m > 0.0)) fail(ErrorCode::validation, where + "measure must be positive");
      if (!lookup.emplace(tok[1], ids.size()).second)
        fail(ErrorCode::validation, where + "duplicate vertex '" + tok[1] + "'");
      ids.push_back(tok[1]);
      measure.push_back(m);
    } else if (tok[0] == "E") {
      if (tok.size() != 5)
        fail(ErrorCode::parse, where + "expected 'E <id> <id> <length> <conductance>'");
      double len = parse_number(tok[3], line, "length");
      double c = parse_number(tok[4], line, "conductance");
      if (!(len > 0.0)) fail(ErrorCode::validation, where + "length must be positive");
      if (!(c > 0.0)) fail(ErrorCode::validation, where + "conductance must be positive");
      pending.push_back({tok[1], tok[2], len, c, line});
    } else {
      fail(ErrorCode::parse, where + "unknown record '" + tok[0] + "'");
    }
  }

  std::vector<Edge> edges;
  edges.reserve(pending.size());
  std::set<std::pair<Index, Index>> seen;
  for (const auto& p : pending) {
    const std::string where = "line " + std::to_string(p.line) + ": ";
    auto ia = lookup.find(p.a);
    auto ib = lookup.find(p.b);
    if (ia == lookup.end()) fail(ErrorCode::validation, where + "unknown vertex '" + p.a + "'");
    if (ib == lookup.end()) fail(ErrorCode::validation, where + "unknown vertex '" + p.b + "'");
    if (ia->second == ib->second) fail(ErrorCode::validation, where + "self-loop");
    auto key = std::minmax(ia->second, ib->second);
    if (!seen.emplace(key.first, key.second).second)
      fail(ErrorCode::validation, where + "duplicate edge");
    edges.push_back({ia->second, ib->second, p.length, p.conductance});
  }
  WeightedGraph g(std::move(ids), std::move(measure), std::move(edges));
  g.require_connected();
  return g;
}

WeightedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open graph file '" + path + "'");
  return read_graph(in);
}

void write_graph(std::ostream& out, const WeightedGraph& g) {
  for (Index i = 0; i < g.vertex_count(); ++i)
    out << "V " << g.ids()[i] << ' ' << format_double(g.measure()[i]) << '\n';
  for (const Edge& e : g.edges())
    out << "E " << g.ids()[e.a] << ' ' << g.ids()[e.b] << ' '
        << format_double(e.length) << ' ' << format_double(e.conductance) << '\n';
}

void write_graph_file(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write graph file '" + path + "'");
  write_graph(out, g);
}

void write_coordinates(std::ostream& out, const WeightedGraph& g,
                       const std::vector<Point2>& coords) {
  require(coords.size() == g.vertex_count(), "coordinate count mismatch");
  out << "id,x,y\n";
  for (Index i = 0; i < coords.size(); ++i)
    out << g.ids()[i] << ',' << format_double(coords[i].x) << ','
        << format_double(coords[i].y) << '\n';
}

WeightedGraph path_graph(std::size_t n, double length, double conductance,
                         double measure) {
  require(n >= 1, "path needs at least one vertex");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, length, conductance});
  return WeightedGraph(std::move(ids), std::vector<double>(n, measure), std::move(edges));
}

WeightedGraph cycle_graph(std::size_t n) {
  require(n >= 3, "cycle needs at least three vertices");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0, 1.0});
  return WeightedGraph(std::move(ids), std::vector<double>(n, 1.0), std::move(edges));
}

WeightedGraph star_graph(std::size_t leaves) {
  std::vector<std::string> ids{"c"};
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < leaves; ++i) {
    ids.push_back("l" + std::to_string(i));
    edges.push_back({0, i + 1, 1.0, 1.0});
  }
  return WeightedGraph(std::move(ids), std::vector<double>(leaves + 1, 1.0),
                       std::move(edges));
}

}  // namespace hkelab
