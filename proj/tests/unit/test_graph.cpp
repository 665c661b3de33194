#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "gcomb/errors.hpp"
#include "gcomb/graph.hpp"
#include "support.hpp"

using namespace gcomb;
using namespace gcomb::testing;

namespace {

std::string data_file(const std::string& name) { return std::string(GCOMB_TEST_DATA) + "/" + name; }

std::vector<int> read_opt_tour(const std::string& path) {
  std::ifstream in(path);
  std::string tok;
  while (in >> tok && tok != "TOUR_SECTION") {
  }
  std::vector<int> tour;
  int id = 0;
  while (in >> id && id != -1) tour.push_back(id - 1);
  return tour;
}

bool symmetric(const WeightedGraph& g) {
  for (int v = 0; v < g.node_count(); ++v) {
    for (const auto& nb : g.neighbors(v)) {
      const auto w = g.weight(nb.id, v);
      if (!w || *w != nb.weight) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("erdos_renyi extremes") {
  const auto k3 = gen_erdos_renyi(3, 1.0, 7);
  CHECK(k3.edge_count() == 3);
  const auto empty = gen_erdos_renyi(5, 0.0, 7);
  CHECK(empty.node_count() == 5);
  CHECK(empty.edge_count() == 0);
  CHECK_THROWS_AS(gen_erdos_renyi(1, 0.5, 1), ArgumentError);
  CHECK_THROWS_AS(gen_erdos_renyi(10, 1.5, 1), ArgumentError);
  CHECK_THROWS_AS(gen_erdos_renyi(10, -0.1, 1), ArgumentError);
}

TEST_CASE("erdos_renyi edge count concentrates") {
  const double pairs = 1000.0 * 999.0 / 2.0;
  const double mean = 0.15 * pairs;
  const double sigma = std::sqrt(pairs * 0.15 * 0.85);
  for (std::uint64_t seed : {1U, 2U, 3U}) {
    const auto g = gen_erdos_renyi(1000, 0.15, seed);
    CHECK(std::abs(static_cast<double>(g.edge_count()) - mean) <= 4.0 * sigma);
    CHECK(symmetric(g));
  }
}

TEST_CASE("barabasi_albert construction") {
  const auto k5 = gen_barabasi_albert(5, 4, 3);
  CHECK(k5.edge_count() == 10);
  for (int v = 0; v < 5; ++v) CHECK(k5.degree(v) == 4);
  const auto pair = gen_barabasi_albert(2, 1, 3);
  CHECK(pair.edge_count() == 1);
  CHECK(pair.has_edge(0, 1));
  const auto big = gen_barabasi_albert(500, 4, 11);
  CHECK(big.edge_count() == 4 * 3 / 2 + (500 - 4) * 4);
  CHECK(symmetric(big));
  CHECK_THROWS_AS(gen_barabasi_albert(4, 4, 1), ArgumentError);
}

TEST_CASE("maxcut weights are uniform on [0, 1]") {
  CHECK(gen_maxcut_weights(WeightedGraph(0), 1).node_count() == 0);
  const auto base = gen_erdos_renyi(1200, 0.15, 5);
  REQUIRE(base.edge_count() >= 100000);
  const auto g = gen_maxcut_weights(base, 9);
  CHECK(g.edge_count() == base.edge_count());
  double sum = 0.0;
  for (const auto& e : g.edges()) {
    CHECK(e.weight >= 0.0);
    CHECK(e.weight <= 1.0);
    sum += e.weight;
  }
  CHECK(std::abs(sum / static_cast<double>(g.edge_count()) - 0.5) <= 0.01);
}

TEST_CASE("tsp points") {
  const auto two = gen_tsp_points(2, PointMode::random, 4);
  REQUIRE(two.size() == 2);
  for (const auto& p : two.points) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= two.grid_extent);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= two.grid_extent);
  }
  CHECK(cluster_count(100) == 1);
  CHECK_THROWS_AS(gen_tsp_points(1, PointMode::random, 1), ArgumentError);

  const int n = 10000;
  const auto ps = gen_tsp_points(n, PointMode::random, 8);
  int quadrant[4] = {0, 0, 0, 0};
  const double half = ps.grid_extent / 2.0;
  for (const auto& p : ps.points) ++quadrant[(p.x >= half ? 1 : 0) + (p.y >= half ? 2 : 0)];
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (int q : quadrant) CHECK(std::abs(q - n / 4.0) <= 3.0 * sigma);

  const auto clustered = gen_tsp_points(300, PointMode::clustered, 8);
  CHECK(clustered.size() == 300);
  for (const auto& p : clustered.points) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= clustered.grid_extent);
  }
}

TEST_CASE("knn graph") {
  PointSet three;
  three.points = {{0, 0}, {3, 0}, {0, 4}};
  const auto k3 = knn_graph(three, 10);
  CHECK(k3.edge_count() == 3);
  CHECK(*k3.weight(1, 2) == doctest::Approx(5.0));
  CHECK(*k3.weight(0, 1) == doctest::Approx(3.0));

  PointSet line;
  line.points = {{0, 0}, {1, 0}, {2, 0}};
  const auto l = knn_graph(line, 1);
  CHECK(l.edge_count() == 2);
  CHECK(*l.weight(0, 1) == 1.0);
  CHECK(*l.weight(1, 2) == 1.0);
  CHECK_FALSE(l.has_edge(0, 2));

  const auto ps = gen_tsp_points(50, PointMode::random, 21);
  const auto g = knn_graph(ps, 10);
  for (int v = 0; v < 50; ++v) CHECK(g.degree(v) >= 10);
  CHECK(symmetric(g));

  const auto full = knn_graph(ps, 49);
  CHECK(full.edge_count() == 50 * 49 / 2);
  for (int u = 0; u < 50; ++u) {
    for (int v = u + 1; v < 50; ++v) CHECK(*full.weight(u, v) == ps.distance(static_cast<std::size_t>(u), static_cast<std::size_t>(v)));
  }
}

TEST_CASE("set cover generator") {
  const auto kb = gen_scp(10, 1.0, 2);
  CHECK(kb.cover_count() == 2);
  CHECK(kb.edge_count() == 16);
  CHECK_THROWS_AS(gen_scp(5, 0.5, 1), ArgumentError);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = gen_scp(30, 0.05, seed);
    for (int v = 0; v < g.node_count(); ++v) CHECK(g.degree(v) >= 2);
  }

  const int cover = 40;
  const int universe = 160;
  const double mean = 0.1 * cover * universe;
  const double sigma = std::sqrt(cover * universe * 0.1 * 0.9);
  ScpDrawStats stats;
  const auto g = gen_scp(200, 0.1, 17, &stats);
  CHECK(g.cover_count() == cover);
  CHECK(std::abs(static_cast<double>(stats.drawn_edges) - mean) <= 4.0 * sigma);
  CHECK(g.edge_count() == stats.drawn_edges + stats.repair_edges);
}

TEST_CASE("generators are pure functions of their seed") {
  CHECK(gen_erdos_renyi(40, 0.2, 5) == gen_erdos_renyi(40, 0.2, 5));
  CHECK_FALSE(gen_erdos_renyi(40, 0.2, 5) == gen_erdos_renyi(40, 0.2, 6));
  CHECK(gen_barabasi_albert(40, 3, 5) == gen_barabasi_albert(40, 3, 5));
  CHECK(gen_scp(40, 0.1, 5) == gen_scp(40, 0.1, 5));
  const auto a = gen_tsp_points(30, PointMode::clustered, 5);
  const auto b = gen_tsp_points(30, PointMode::clustered, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].y == b.points[i].y);
  }
}

TEST_CASE("tsplib instances reproduce their known optima") {
  struct Case {
    const char* name;
    std::size_t n;
    double opt;
  };
  for (const Case& c : {Case{"berlin52", 52, 7542.0}, Case{"eil51", 51, 426.0}}) {
    CAPTURE(c.name);
    const auto ps = parse_tsplib(data_file(std::string(c.name) + ".tsp"));
    CHECK(ps.size() == c.n);
    CHECK(ps.name == c.name);
    const auto g = knn_graph(ps, 10);
    const auto tour = read_opt_tour(data_file(std::string(c.name) + ".opt.tour"));
    REQUIRE(tour.size() == c.n);
    CHECK(cyclic_length(g, tour) == c.opt);
  }
}

TEST_CASE("tsplib parse errors") {
  std::istringstream explicit_type("NAME: x\nTYPE: TSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EXPLICIT\n");
  CHECK_THROWS_AS(parse_tsplib(explicit_type), ParseError);
  std::istringstream bad_row("NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 zz\nEOF\n");
  try {
    parse_tsplib(bad_row, "bad.tsp");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("2 zz") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_tsplib(std::string("/nonexistent/file.tsp")), IoError);
}

TEST_CASE("native format round trip") {
  const WeightedGraph graphs[] = {
      gen_maxcut_weights(gen_erdos_renyi(20, 0.3, 1), 2),
      gen_scp(20, 0.2, 3),
      knn_graph(gen_tsp_points(12, PointMode::random, 4), 5),
      knn_graph(parse_tsplib(data_file("eil51.tsp")), 10),
  };
  for (const auto& g : graphs) {
    std::stringstream io;
    write_graph(io, g);
    const auto back = read_graph(io);
    CHECK(back == g);
    CHECK(back.kind() == g.kind());
  }
  std::istringstream junk("3 1 general\n0 1\n");
  CHECK_THROWS_AS(read_graph(junk), ParseError);
}

TEST_CASE("graph construction contracts") {
  WeightedGraph g(3);
  g.add_edge(0, 1, 0.5);
  CHECK_THROWS_AS(g.add_edge(1, 0), ArgumentError);
  CHECK_THROWS_AS(g.add_edge(2, 2), ArgumentError);
  CHECK_THROWS_AS(g.add_edge(0, 3), ArgumentError);
  CHECK_THROWS_AS(g.add_edge(0, 2, -1.0), ArgumentError);
  auto b = WeightedGraph::bipartite(2, 3);
  CHECK_THROWS_AS(b.add_edge(0, 1), ArgumentError);
  CHECK(std::isinf(g.distance(0, 2)));
}
