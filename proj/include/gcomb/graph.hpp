#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gcomb {

enum class GraphKind { general, bipartite_scp, euclidean };

std::string_view to_string(GraphKind kind);
GraphKind graph_kind_from_string(std::string_view name);

// How pairwise distances are derived from coordinates.
enum class DistanceRule {
  exact,        // real Euclidean distance (generated instances)
  tsplib_nint,  // TSPLIB EUC_2D: nint(sqrt(dx^2 + dy^2))
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct PointSet {
  std::vector<Point> points;
  double grid_extent = 1.0;
  DistanceRule rule = DistanceRule::exact;
  std::string name;

  std::size_t size() const { return points.size(); }
  double distance(std::size_t a, std::size_t b) const;
};

struct Neighbor {
  int id;
  double weight;
};

struct Edge {
  int u;
  int v;
  double weight;
};

/// Undirected weighted graph with adjacency kept sorted by neighbor id.
///
/// Built once through add_edge() and then treated as immutable; instances are
/// shared between episodes and replay tuples through shared_ptr<const WeightedGraph>.
/// Nodes [0, cover_count) of a bipartite_scp graph are the subsets C, the rest the
/// universe U. Euclidean graphs carry their PointSet, and distance() is defined for
/// every pair (tours use the full metric, not just the sparse edge set).
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(int node_count, GraphKind kind = GraphKind::general);

  static WeightedGraph bipartite(int cover_count, int universe_count);
  static WeightedGraph euclidean(PointSet points);

  void add_edge(int u, int v, double weight = 1.0);
  void set_weight(int u, int v, double weight);

  int node_count() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edge_count_; }
  GraphKind kind() const { return kind_; }

  std::span<const Neighbor> neighbors(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  int degree(int v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }
  bool has_edge(int u, int v) const;
  std::optional<double> weight(int u, int v) const;

  // Edges with u < v, ordered by (u, v).
  std::vector<Edge> edges() const;
  double total_weight() const;

  int cover_count() const { return cover_count_; }
  bool is_cover_node(int v) const { return v < cover_count_; }

  const PointSet* points() const { return points_ ? &*points_ : nullptr; }
  // Metric distance for euclidean graphs, edge weight otherwise (missing edge: +inf).
  double distance(int u, int v) const;
  // Coordinate scale used to normalize distances and node features (1 for non-euclidean).
  double scale() const { return points_ ? points_->grid_extent : 1.0; }

  bool operator==(const WeightedGraph& other) const;

 private:
  void check_node(int v) const;

  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t edge_count_ = 0;
  GraphKind kind_ = GraphKind::general;
  int cover_count_ = 0;
  std::optional<PointSet> points_;
};

using GraphPtr = std::shared_ptr<const WeightedGraph>;

// Relabel nodes: node v of g becomes perm[v]. Only valid for general graphs.
WeightedGraph permute(const WeightedGraph& g, std::span<const int> perm);

// ---- generators -------------------------------------------------------------

WeightedGraph gen_erdos_renyi(int n, double edge_prob, std::uint64_t seed);
WeightedGraph gen_barabasi_albert(int n, int m, std::uint64_t seed);
WeightedGraph gen_maxcut_weights(const WeightedGraph& g, std::uint64_t seed);

enum class PointMode { random, clustered };
PointMode point_mode_from_string(std::string_view name);

constexpr double kDefaultGridExtent = 1e6;

PointSet gen_tsp_points(int n, PointMode mode, std::uint64_t seed,
                        double grid_extent = kDefaultGridExtent);
int cluster_count(int n);

WeightedGraph knn_graph(const PointSet& points, int k);

struct ScpDrawStats {
  std::size_t drawn_edges = 0;   // cross edges from the Bernoulli pass
  std::size_t repair_edges = 0;  // edges added to meet the degree floors
};
WeightedGraph gen_scp(int n, double edge_prob, std::uint64_t seed, ScpDrawStats* stats = nullptr);
int scp_cover_count(int n);

// ---- files ------------------------------------------------------------------

PointSet parse_tsplib(std::istream& in, std::string_view source = "<stream>");
PointSet parse_tsplib(const std::string& path);

// Native text format, see docs/formats.md.
void write_graph(std::ostream& out, const WeightedGraph& g);
WeightedGraph read_graph(std::istream& in);
void save_graph(const std::string& path, const WeightedGraph& g);
WeightedGraph load_graph(const std::string& path);

}  // namespace gcomb
