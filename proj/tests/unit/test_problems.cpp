#include <doctest.h>

#include <cmath>

#include "gcomb/errors.hpp"
#include "gcomb/problems.hpp"
#include "gcomb/rng.hpp"
#include "support.hpp"

using namespace gcomb;
using namespace gcomb::testing;

namespace {

// Random episode until termination; returns the summed raw rewards.
double random_episode(const WeightedGraph& g, ProblemKind kind, Rng& rng, EpisodeState* final_state = nullptr) {
  EpisodeState s = init_state(g, kind);
  double total = 0.0;
  while (!terminated(g, s)) {
    const auto cands = candidates(g, s);
    const int v = cands[rng.below(cands.size())];
    const Transition t = apply(g, s, v);
    total += t.reward;
    s = t.state;
    CHECK(recompute_cost(g, s) == doctest::Approx(s.cost).epsilon(1e-12));
  }
  if (final_state) *final_state = s;
  return total;
}

GraphPtr random_instance(ProblemKind kind, Rng& rng) {
  const int n = static_cast<int>(rng.range(10, 20));
  const std::uint64_t seed = rng.next_u64();
  switch (kind) {
    case ProblemKind::mvc:
      return std::make_shared<WeightedGraph>(gen_erdos_renyi(n, 0.2, seed));
    case ProblemKind::maxcut:
      return std::make_shared<WeightedGraph>(gen_maxcut_weights(gen_barabasi_albert(n, 3, seed), seed + 1));
    case ProblemKind::tsp:
      return std::make_shared<WeightedGraph>(knn_graph(gen_tsp_points(n, PointMode::random, seed), 10));
    case ProblemKind::scp:
      return std::make_shared<WeightedGraph>(gen_scp(n, 0.15, seed));
  }
  return nullptr;
}

}  // namespace

TEST_CASE("initial states") {
  const auto k3 = complete_graph(3);
  const auto s = init_state(k3, ProblemKind::mvc);
  CHECK(s.cost == 0.0);
  CHECK(candidates(k3, s).size() == 3);
  CHECK(init_state(gen_erdos_renyi(8, 0.5, 1), ProblemKind::maxcut).cost == 0.0);
  const auto sq = points_graph({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  const auto t = init_state(sq, ProblemKind::tsp);
  CHECK(t.tour.empty());
  CHECK(t.cost == 0.0);
  CHECK_THROWS_AS(init_state(k3, ProblemKind::tsp), ArgumentError);
  CHECK_THROWS_AS(init_state(k3, ProblemKind::scp), ArgumentError);
  CHECK_THROWS_AS(init_state(gen_scp(10, 0.5, 1), ProblemKind::mvc), ArgumentError);
}

TEST_CASE("candidates") {
  const auto k3 = complete_graph(3);
  const auto s = apply(k3, init_state(k3, ProblemKind::mvc), 0).state;
  CHECK(candidates(k3, s) == std::vector<int>{1, 2});

  auto sc = WeightedGraph::bipartite(2, 3);
  sc.add_edge(0, 2);
  sc.add_edge(0, 3);
  sc.add_edge(1, 4);
  CHECK(candidates(sc, init_state(sc, ProblemKind::scp)) == std::vector<int>{0, 1});

  // A terminated MVC state still lists its outside nodes.
  const auto p3 = path_graph(3);
  const auto done = apply(p3, init_state(p3, ProblemKind::mvc), 1).state;
  CHECK(terminated(p3, done));
  CHECK(candidates(p3, done) == std::vector<int>{0, 2});
}

TEST_CASE("rewards") {
  const auto g = gen_erdos_renyi(12, 0.3, 2);
  auto s = init_state(g, ProblemKind::mvc);
  for (int v : {3, 0, 7}) {
    const auto t = apply(g, s, v);
    CHECK(t.reward == -1.0);
    s = t.state;
  }

  WeightedGraph e(2);
  e.add_edge(0, 1, 0.7);
  const auto cut = apply(e, init_state(e, ProblemKind::maxcut), 0);
  CHECK(cut.reward == doctest::Approx(0.7));

  const auto line = points_graph({{0, 0}, {1, 0}, {2, 0}});
  auto ts = init_state(line, ProblemKind::tsp);
  const auto first = apply(line, ts, 0);
  CHECK(first.reward == 0.0);
  const auto second = apply(line, first.state, 2);
  CHECK(second.reward == doctest::Approx(-4.0));
  // Both insertion positions of p1 into (p0, p2) add 1 + 1 - 2 = 0.
  const auto third = apply(line, second.state, 1);
  CHECK(third.reward == doctest::Approx(0.0));
  CHECK(tour_length(line, third.state.tour) == doctest::Approx(4.0));

  CHECK_THROWS_AS(apply(line, third.state, 1), ContractViolation);
}

TEST_CASE("termination and solution values") {
  const auto p3 = path_graph(3);
  const auto mvc = apply(p3, init_state(p3, ProblemKind::mvc), 1).state;
  CHECK(terminated(p3, mvc));
  CHECK(solution_value(p3, mvc) == -1.0);
  CHECK_THROWS_AS(solution_value(p3, init_state(p3, ProblemKind::mvc)), ContractViolation);

  WeightedGraph e(2);
  e.add_edge(0, 1, 1.0);
  CHECK(terminated(e, apply(e, init_state(e, ProblemKind::maxcut), 0).state));

  const auto k3 = complete_graph(3);
  const auto cut = apply(k3, init_state(k3, ProblemKind::maxcut), 0).state;
  CHECK(terminated(k3, cut));
  CHECK(solution_value(k3, cut) == 2.0);

  const auto sq = points_graph(unit_square());
  auto s = init_state(sq, ProblemKind::tsp);
  for (int v : {0, 1, 2}) {
    s = apply(sq, s, v).state;
    CHECK_FALSE(terminated(sq, s));
  }
  s = apply(sq, s, 3).state;
  CHECK(terminated(sq, s));
  CHECK(solution_value(sq, s) == doctest::Approx(-4.0));
}

TEST_CASE("telescoping rewards and feasible terminal states") {
  Rng rng(2024);
  for (ProblemKind kind : {ProblemKind::mvc, ProblemKind::maxcut, ProblemKind::tsp, ProblemKind::scp}) {
    CAPTURE(to_string(kind));
    for (int i = 0; i < 50; ++i) {
      const auto g = random_instance(kind, rng);
      EpisodeState last;
      const double total = random_episode(*g, kind, rng, &last);
      const double value = solution_value(*g, last);
      CHECK(std::abs(total - value) <= 1e-9 * std::max(1.0, std::abs(value)));
      if (kind == ProblemKind::mvc) CHECK(is_vertex_cover(*g, last.solution));
      if (kind == ProblemKind::scp) CHECK(is_set_cover(*g, last.solution));
      if (kind == ProblemKind::tsp) CHECK(is_tour(last.tour, g->node_count()));
      if (kind == ProblemKind::maxcut) {
        for (int v : candidates(*g, last)) CHECK(maxcut_gain(*g, last, v) <= 0.0);
      }
    }
  }
}

TEST_CASE("apply leaves its input untouched") {
  Rng rng(5);
  for (ProblemKind kind : {ProblemKind::mvc, ProblemKind::maxcut, ProblemKind::tsp, ProblemKind::scp}) {
    const auto g = random_instance(kind, rng);
    EpisodeState s = init_state(*g, kind);
    s = apply(*g, s, candidates(*g, s).front()).state;
    const EpisodeState before = s;
    apply(*g, s, candidates(*g, s).back());
    CHECK(s.solution == before.solution);
    CHECK(s.tags == before.tags);
    CHECK(s.covered == before.covered);
    CHECK(s.hits == before.hits);
    CHECK(s.tour == before.tour);
    CHECK(s.cost == before.cost);
  }
}

TEST_CASE("cheapest insertion scans every position") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ps = gen_tsp_points(9, PointMode::random, rng.next_u64());
    const auto g = knn_graph(ps, 3);
    std::vector<int> tour{0, 3, 5, 1, 7, 2};
    const int v = 8;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i < tour.size(); ++i) {
      const int a = tour[i];
      const int b = tour[(i + 1) % tour.size()];
      const double d = g.distance(a, v) + g.distance(v, b) - g.distance(a, b);
      if (d < best) {
        best = d;
        best_pos = i;
      }
    }
    const Insertion ins = cheapest_insertion(g, tour, v);
    CHECK(ins.position == best_pos);
    CHECK(ins.delta == doctest::Approx(best));
  }
  // Ties go to the lowest position.
  const auto sq = points_graph({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}});
  CHECK(cheapest_insertion(sq, {0, 1, 2, 3}, 4).position == 0);
}

TEST_CASE("tsp episodes keep each node once") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const auto g = random_instance(ProblemKind::tsp, rng);
    EpisodeState last;
    random_episode(*g, ProblemKind::tsp, rng, &last);
    CHECK(is_tour(last.tour, g->node_count()));
    CHECK(tour_length(*g, last.tour) == doctest::Approx(cyclic_length(*g, last.tour)));
  }
}

TEST_CASE("natural values") {
  CHECK(natural_value(ProblemKind::mvc, -7.0) == 7.0);
  CHECK(natural_value(ProblemKind::scp, -3.0) == 3.0);
  CHECK(natural_value(ProblemKind::tsp, -12.5) == 12.5);
  CHECK(natural_value(ProblemKind::maxcut, 4.5) == 4.5);
}
