#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hkelab/error.hpp"

namespace hkelab {

struct Edge {
  Index a = 0;
  Index b = 0;
  double length = 1.0;
  double conductance = 1.0;
};

struct Neighbor {
  Index vertex;
  double length;
  double conductance;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected weighted graph carrying a vertex measure.
///
/// Construction checks the local invariants (positive weights, no self-loops,
/// no duplicate edges). Connectivity is a separate check because a few callers
/// want to report the components of a broken input rather than reject it
/// outright; see require_connected().
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::vector<std::string> ids, std::vector<double> measure,
                std::vector<Edge> edges);

  std::size_t vertex_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<double>& measure() const noexcept { return measure_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::vector<Neighbor>>& adjacency() const noexcept {
    return adjacency_;
  }

  Index index_of(const std::string& id) const;
  double total_measure() const;
  double min_edge_length() const;

  /// Connected components, each sorted, ordered by smallest member.
  std::vector<PointSet> components() const;
  void require_connected() const;

  /// Same topology with replaced per-vertex / per-edge data.
  WeightedGraph with_measure(std::vector<double> measure) const;
  WeightedGraph with_edges(std::vector<Edge> edges) const;

 private:
  void build_adjacency();

  std::vector<std::string> ids_;
  std::vector<double> measure_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, Index> lookup_;
};

/// Text format, one record per line:
///   V <id> <measure>
///   E <id> <id> <length> <conductance>
/// '#' starts a comment. Errors carry the 1-based line number.
WeightedGraph read_graph(std::istream& in);
WeightedGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const WeightedGraph& g);
void write_graph_file(const std::string& path, const WeightedGraph& g);

/// CSV `id,x,y`.
void write_coordinates(std::ostream& out, const WeightedGraph& g,
                       const std::vector<Point2>& coords);

/// Path v0 - v1 - ... - v{n-1} with the given per-edge data and unit measure.
WeightedGraph path_graph(std::size_t n, double length = 1.0,
                         double conductance = 1.0, double measure = 1.0);

/// Cycle on n vertices with unit data.
WeightedGraph cycle_graph(std::size_t n);

/// Star: vertex 0 joined to `leaves` unit-length unit-conductance edges.
WeightedGraph star_graph(std::size_t leaves);

}  // namespace hkelab
