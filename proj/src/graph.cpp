#include "gcomb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gcomb/errors.hpp"
#include "gcomb/rng.hpp"

namespace gcomb {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::general: return "general";
    case GraphKind::bipartite_scp: return "bipartite_scp";
    case GraphKind::euclidean: return "euclidean";
  }
  return "general";
}

GraphKind graph_kind_from_string(std::string_view name) {
  if (name == "general") return GraphKind::general;
  if (name == "bipartite_scp") return GraphKind::bipartite_scp;
  if (name == "euclidean") return GraphKind::euclidean;
  throw ParseError("unknown graph kind '" + std::string(name) + "'");
}

double PointSet::distance(std::size_t a, std::size_t b) const {
  const double dx = points[a].x - points[b].x;
  const double dy = points[a].y - points[b].y;
  const double d = std::sqrt(dx * dx + dy * dy);
  if (rule == DistanceRule::tsplib_nint) return std::floor(d + 0.5);
  return d;
}

// ---- WeightedGraph ------------------------------------------------------------

WeightedGraph::WeightedGraph(int node_count, GraphKind kind) : kind_(kind) {
  if (node_count < 0) throw ArgumentError("negative node count");
  adjacency_.resize(static_cast<std::size_t>(node_count));
}

WeightedGraph WeightedGraph::bipartite(int cover_count, int universe_count) {
  if (cover_count < 0 || universe_count < 0) throw ArgumentError("negative partition size");
  WeightedGraph g(cover_count + universe_count, GraphKind::bipartite_scp);
  g.cover_count_ = cover_count;
  return g;
}

WeightedGraph WeightedGraph::euclidean(PointSet points) {
  WeightedGraph g(static_cast<int>(points.size()), GraphKind::euclidean);
  g.points_ = std::move(points);
  return g;
}

void WeightedGraph::check_node(int v) const {
  if (v < 0 || v >= node_count()) {
    throw ArgumentError("node " + std::to_string(v) + " out of range [0, " +
                        std::to_string(node_count()) + ")");
  }
}

void WeightedGraph::add_edge(int u, int v, double weight) {
  check_node(u);
  check_node(v);
  if (u == v) throw ArgumentError("self-loop on node " + std::to_string(u));
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw ArgumentError("edge weight must be finite and >= 0");
  if (kind_ == GraphKind::bipartite_scp && is_cover_node(u) == is_cover_node(v)) {
    throw ArgumentError("bipartite_scp edges must join a cover node and a universe node");
  }
  auto insert = [&](int from, int to) {
    auto& list = adjacency_[static_cast<std::size_t>(from)];
    auto it = std::lower_bound(list.begin(), list.end(), to,
                               [](const Neighbor& a, int id) { return a.id < id; });
    if (it != list.end() && it->id == to) {
      throw ArgumentError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    list.insert(it, Neighbor{to, weight});
  };
  insert(u, v);
  insert(v, u);
  ++edge_count_;
}

void WeightedGraph::set_weight(int u, int v, double weight) {
  check_node(u);
  check_node(v);
  auto update = [&](int from, int to) {
    auto& list = adjacency_[static_cast<std::size_t>(from)];
    auto it = std::lower_bound(list.begin(), list.end(), to,
                               [](const Neighbor& a, int id) { return a.id < id; });
    if (it == list.end() || it->id != to) throw ArgumentError("no such edge");
    it->weight = weight;
  };
  update(u, v);
  update(v, u);
}

bool WeightedGraph::has_edge(int u, int v) const { return weight(u, v).has_value(); }

std::optional<double> WeightedGraph::weight(int u, int v) const {
  check_node(u);
  check_node(v);
  const auto& list = adjacency_[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Neighbor& a, int id) { return a.id < id; });
  if (it == list.end() || it->id != v) return std::nullopt;
  return it->weight;
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int u = 0; u < node_count(); ++u) {
    for (const auto& nb : neighbors(u)) {
      if (u < nb.id) out.push_back(Edge{u, nb.id, nb.weight});
    }
  }
  return out;
}

double WeightedGraph::total_weight() const {
  double total = 0.0;
  for (const auto& e : edges()) total += e.weight;
  return total;
}

double WeightedGraph::distance(int u, int v) const {
  if (points_) return points_->distance(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  if (u == v) return 0.0;
  return weight(u, v).value_or(std::numeric_limits<double>::infinity());
}

bool WeightedGraph::operator==(const WeightedGraph& other) const {
  if (kind_ != other.kind_ || cover_count_ != other.cover_count_ ||
      node_count() != other.node_count() || edge_count_ != other.edge_count_) {
    return false;
  }
  for (int v = 0; v < node_count(); ++v) {
    auto a = neighbors(v);
    auto b = other.neighbors(v);
    if (!std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const Neighbor& x, const Neighbor& y) {
          return x.id == y.id && x.weight == y.weight;
        })) {
      return false;
    }
  }
  if (points_.has_value() != other.points_.has_value()) return false;
  if (points_) {
    const auto& p = points_->points;
    const auto& q = other.points_->points;
    if (points_->grid_extent != other.points_->grid_extent || points_->rule != other.points_->rule) return false;
    if (!std::equal(p.begin(), p.end(), q.begin(), q.end(),
                    [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; })) {
      return false;
    }
  }
  return true;
}

WeightedGraph permute(const WeightedGraph& g, std::span<const int> perm) {
  const int n = g.node_count();
  if (static_cast<int>(perm.size()) != n) throw ArgumentError("permutation size mismatch");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) throw ArgumentError("not a permutation");
    seen[static_cast<std::size_t>(p)] = 1;
  }
  WeightedGraph out;
  switch (g.kind()) {
    case GraphKind::general:
      out = WeightedGraph(n);
      break;
    case GraphKind::euclidean: {
      PointSet ps = *g.points();
      for (int v = 0; v < n; ++v) ps.points[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] = g.points()->points[static_cast<std::size_t>(v)];
      out = WeightedGraph::euclidean(std::move(ps));
      break;
    }
    case GraphKind::bipartite_scp:
      throw ArgumentError("permute does not support bipartite_scp graphs");
  }
  for (const auto& e : g.edges()) {
    out.add_edge(perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)], e.weight);
  }
  return out;
}

// ---- generators ---------------------------------------------------------------

WeightedGraph gen_erdos_renyi(int n, double edge_prob, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("erdos_renyi: n must be >= 2");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ArgumentError("erdos_renyi: edge probability must be in [0, 1]");
  Rng rng(seed);
  WeightedGraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(edge_prob)) g.add_edge(u, v, 1.0);
    }
  }
  return g;
}

WeightedGraph gen_barabasi_albert(int n, int m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw ArgumentError("barabasi_albert: need 1 <= m < n");
  Rng rng(seed);
  WeightedGraph g(n);
  std::vector<long> degree(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < m; ++u) {
    for (int v = u + 1; v < m; ++v) {
      g.add_edge(u, v, 1.0);
      ++degree[static_cast<std::size_t>(u)];
      ++degree[static_cast<std::size_t>(v)];
    }
  }
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<int> targets;
  for (int v = m; v < n; ++v) {
    targets.clear();
    std::fill(chosen.begin(), chosen.begin() + v, 0);
    while (static_cast<int>(targets.size()) < m) {
      long mass = 0;
      for (int u = 0; u < v; ++u) {
        if (!chosen[static_cast<std::size_t>(u)]) mass += degree[static_cast<std::size_t>(u)];
      }
      int pick = -1;
      if (mass == 0) {
        // No degree mass left (e.g. m = 1 seed node): fall back to a uniform choice.
        std::vector<int> pool;
        for (int u = 0; u < v; ++u) {
          if (!chosen[static_cast<std::size_t>(u)]) pool.push_back(u);
        }
        pick = pool[rng.below(pool.size())];
      } else {
        long r = static_cast<long>(rng.below(static_cast<std::size_t>(mass)));
        for (int u = 0; u < v; ++u) {
          if (chosen[static_cast<std::size_t>(u)]) continue;
          r -= degree[static_cast<std::size_t>(u)];
          if (r < 0) {
            pick = u;
            break;
          }
        }
      }
      chosen[static_cast<std::size_t>(pick)] = 1;
      targets.push_back(pick);
    }
    for (int u : targets) {
      g.add_edge(u, v, 1.0);
      ++degree[static_cast<std::size_t>(u)];
      ++degree[static_cast<std::size_t>(v)];
    }
  }
  return g;
}

WeightedGraph gen_maxcut_weights(const WeightedGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  WeightedGraph out = g;
  for (const auto& e : g.edges()) out.set_weight(e.u, e.v, rng.uniform());
  return out;
}

PointMode point_mode_from_string(std::string_view name) {
  if (name == "random") return PointMode::random;
  if (name == "clustered") return PointMode::clustered;
  throw ArgumentError("unknown point mode '" + std::string(name) + "'");
}

int cluster_count(int n) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(n) / 100.0)));
}

PointSet gen_tsp_points(int n, PointMode mode, std::uint64_t seed, double grid_extent) {
  if (n < 2) throw ArgumentError("tsp points: n must be >= 2");
  if (!(grid_extent > 0.0)) throw ArgumentError("tsp points: grid extent must be positive");
  Rng rng(seed);
  PointSet ps;
  ps.grid_extent = grid_extent;
  ps.points.reserve(static_cast<std::size_t>(n));
  if (mode == PointMode::random) {
    for (int i = 0; i < n; ++i) {
      const double x = rng.uniform(0.0, grid_extent);
      const double y = rng.uniform(0.0, grid_extent);
      ps.points.push_back({x, y});
    }
    return ps;
  }
  const int k = cluster_count(n);
  std::vector<Point> centers;
  for (int c = 0; c < k; ++c) {
    const double x = rng.uniform(0.0, grid_extent);
    const double y = rng.uniform(0.0, grid_extent);
    centers.push_back({x, y});
  }
  const double sigma = grid_extent / (10.0 * std::sqrt(static_cast<double>(k)));
  for (int i = 0; i < n; ++i) {
    const Point& c = centers[rng.below(centers.size())];
    const double x = std::clamp(c.x + sigma * rng.normal(), 0.0, grid_extent);
    const double y = std::clamp(c.y + sigma * rng.normal(), 0.0, grid_extent);
    ps.points.push_back({x, y});
  }
  return ps;
}

WeightedGraph knn_graph(const PointSet& points, int k) {
  if (k < 1) throw ArgumentError("knn_graph: k must be >= 1");
  const int n = static_cast<int>(points.size());
  WeightedGraph g = WeightedGraph::euclidean(points);
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> order;
  for (int u = 0; u < n; ++u) {
    order.clear();
    for (int v = 0; v < n; ++v) {
      if (v != u) order.push_back(v);
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), [&](int a, int b) {
      const double da = points.distance(static_cast<std::size_t>(u), static_cast<std::size_t>(a));
      const double db = points.distance(static_cast<std::size_t>(u), static_cast<std::size_t>(b));
      return da < db || (da == db && a < b);
    });
    for (std::size_t i = 0; i < take; ++i) {
      const int v = order[i];
      pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [u, v] : pairs) {
    g.add_edge(u, v, points.distance(static_cast<std::size_t>(u), static_cast<std::size_t>(v)));
  }
  return g;
}

int scp_cover_count(int n) { return static_cast<int>(std::lround(0.2 * n)); }

WeightedGraph gen_scp(int n, double edge_prob, std::uint64_t seed, ScpDrawStats* stats) {
  if (n < 10) throw ArgumentError("gen_scp: n must be >= 10 to meet the degree floors");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw ArgumentError("gen_scp: edge probability must be in (0, 1]");
  const int cover = scp_cover_count(n);
  const int universe = n - cover;
  Rng rng(seed);
  WeightedGraph g = WeightedGraph::bipartite(cover, universe);
  ScpDrawStats local;
  for (int c = 0; c < cover; ++c) {
    for (int u = cover; u < n; ++u) {
      if (rng.bernoulli(edge_prob)) {
        g.add_edge(c, u, 1.0);
        ++local.drawn_edges;
      }
    }
  }
  // Repair only adds edges: universe nodes up to degree 2, then cover nodes up to degree 1.
  for (int u = cover; u < n; ++u) {
    while (g.degree(u) < 2) {
      std::vector<int> pool;
      for (int c = 0; c < cover; ++c) {
        if (!g.has_edge(c, u)) pool.push_back(c);
      }
      g.add_edge(pool[rng.below(pool.size())], u, 1.0);
      ++local.repair_edges;
    }
  }
  for (int c = 0; c < cover; ++c) {
    if (g.degree(c) == 0) {
      g.add_edge(c, cover + static_cast<int>(rng.below(static_cast<std::size_t>(universe))), 1.0);
      ++local.repair_edges;
    }
  }
  if (stats) *stats = local;
  return g;
}

// ---- TSPLIB -------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

PointSet parse_tsplib(std::istream& in, std::string_view source) {
  PointSet ps;
  ps.rule = DistanceRule::tsplib_nint;
  long dimension = -1;
  bool in_coords = false;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + what + " in line '" + trim(line) + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (upper(t) == "EOF") break;
    if (in_coords) {
      std::istringstream row(t);
      long id = 0;
      double x = 0.0;
      double y = 0.0;
      std::string extra;
      if (!(row >> id >> x >> y)) {
        if (std::isalpha(static_cast<unsigned char>(t[0]))) {
          in_coords = false;  // next section
        } else {
          throw fail("malformed NODE_COORD_SECTION entry");
        }
      } else {
        if (row >> extra) throw fail("trailing data in NODE_COORD_SECTION entry");
        if (id != static_cast<long>(ps.points.size()) + 1) throw fail("unexpected node id " + std::to_string(id));
        ps.points.push_back({x, y});
        continue;
      }
    }
    const auto colon = t.find(':');
    std::string key = upper(trim(t.substr(0, colon == std::string::npos ? t.size() : colon)));
    const std::string value = colon == std::string::npos ? std::string() : trim(t.substr(colon + 1));
    if (key == "NODE_COORD_SECTION") {
      in_coords = true;
    } else if (key == "NAME") {
      ps.name = value;
    } else if (key == "TYPE") {
      if (upper(value) != "TSP") throw fail("unsupported TYPE '" + value + "'");
    } else if (key == "DIMENSION") {
      try {
        dimension = std::stol(value);
      } catch (const std::exception&) {
        throw fail("bad DIMENSION");
      }
    } else if (key == "EDGE_WEIGHT_TYPE") {
      if (upper(value) != "EUC_2D") throw fail("unsupported EDGE_WEIGHT_TYPE '" + value + "'");
    } else if (key == "COMMENT" || key == "NODE_COORD_TYPE" || key == "DISPLAY_DATA_TYPE") {
      // informational
    } else {
      throw fail("unsupported keyword '" + key + "'");
    }
  }
  if (dimension >= 0 && static_cast<long>(ps.points.size()) != dimension) {
    throw ParseError(std::string(source) + ": DIMENSION " + std::to_string(dimension) + " but " +
                     std::to_string(ps.points.size()) + " coordinates");
  }
  if (ps.points.size() < 2) throw ParseError(std::string(source) + ": fewer than 2 coordinates");
  double extent = 0.0;
  for (const auto& p : ps.points) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  ps.grid_extent = extent > 0.0 ? extent : 1.0;
  return ps;
}

PointSet parse_tsplib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_tsplib(in, path);
}

// ---- native format ------------------------------------------------------------

namespace {

std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_graph(std::ostream& out, const WeightedGraph& g) {
  out << g.node_count() << ' ' << g.edge_count() << ' ' << to_string(g.kind()) << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << fmt_real(e.weight) << '\n';
  if (g.kind() == GraphKind::bipartite_scp) out << "cover " << g.cover_count() << '\n';
  if (const PointSet* ps = g.points()) {
    out << "extent " << fmt_real(ps->grid_extent) << '\n';
    out << "metric " << (ps->rule == DistanceRule::tsplib_nint ? "tsplib_nint" : "exact") << '\n';
    if (!ps->name.empty()) out << "name " << ps->name << '\n';
    for (std::size_t i = 0; i < ps->size(); ++i) {
      out << "point " << i << ' ' << fmt_real(ps->points[i].x) << ' ' << fmt_real(ps->points[i].y) << '\n';
    }
  }
}

WeightedGraph read_graph(std::istream& in) {
  std::string line;
  long line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (!t.empty() && t[0] != '#') {
        line = t;
        return true;
      }
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    return ParseError("graph line " + std::to_string(line_no) + ": " + what);
  };
  if (!next()) throw ParseError("empty graph file");
  long n = 0;
  long m = 0;
  std::string kind_name;
  {
    std::istringstream hdr(line);
    if (!(hdr >> n >> m >> kind_name) || n < 0 || m < 0) throw fail("expected 'n m kind'");
  }
  const GraphKind kind = graph_kind_from_string(kind_name);
  std::vector<Edge> edges;
  for (long i = 0; i < m; ++i) {
    if (!next()) throw fail("missing edge lines");
    std::istringstream row(line);
    Edge e{};
    if (!(row >> e.u >> e.v >> e.weight)) throw fail("expected 'u v w'");
    edges.push_back(e);
  }
  int cover = -1;
  PointSet ps;
  bool have_points = false;
  while (next()) {
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "cover") {
      if (!(row >> cover)) throw fail("bad cover line");
    } else if (key == "extent") {
      if (!(row >> ps.grid_extent)) throw fail("bad extent line");
    } else if (key == "metric") {
      std::string rule;
      row >> rule;
      if (rule == "exact") ps.rule = DistanceRule::exact;
      else if (rule == "tsplib_nint") ps.rule = DistanceRule::tsplib_nint;
      else throw fail("unknown metric '" + rule + "'");
    } else if (key == "name") {
      std::getline(row >> std::ws, ps.name);
    } else if (key == "point") {
      std::size_t i = 0;
      Point p;
      if (!(row >> i >> p.x >> p.y) || i != ps.points.size()) throw fail("bad point line");
      ps.points.push_back(p);
      have_points = true;
    } else {
      throw fail("unknown line '" + key + "'");
    }
  }
  WeightedGraph g;
  switch (kind) {
    case GraphKind::general:
      g = WeightedGraph(static_cast<int>(n));
      break;
    case GraphKind::bipartite_scp:
      if (cover < 0 || cover > n) throw ParseError("bipartite_scp graph needs a valid 'cover k' line");
      g = WeightedGraph::bipartite(cover, static_cast<int>(n) - cover);
      break;
    case GraphKind::euclidean:
      if (!have_points || static_cast<long>(ps.points.size()) != n) throw ParseError("euclidean graph needs n point lines");
      g = WeightedGraph::euclidean(std::move(ps));
      break;
  }
  for (const auto& e : edges) {
    try {
      g.add_edge(e.u, e.v, e.weight);
    } catch (const ArgumentError& err) {
      throw ParseError(std::string("invalid edge: ") + err.what());
    }
  }
  return g;
}

void save_graph(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_graph(out, g);
  if (!out) throw IoError("write failed for " + path);
}

WeightedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_graph(in);
}

}  // namespace gcomb
