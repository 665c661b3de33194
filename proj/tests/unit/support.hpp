#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "gcomb/embedding.hpp"
#include "gcomb/graph.hpp"
#include "gcomb/problems.hpp"
#include "gcomb/rng.hpp"

namespace gcomb::testing {

inline constexpr ProblemKind kKinds[] = {ProblemKind::mvc, ProblemKind::maxcut, ProblemKind::tsp, ProblemKind::scp};

inline WeightedGraph path_graph(int n) {
  WeightedGraph g(n);
  for (int v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

inline WeightedGraph cycle_graph(int n) {
  WeightedGraph g = path_graph(n);
  g.add_edge(0, n - 1);
  return g;
}

inline WeightedGraph complete_graph(int n, double w = 1.0) {
  WeightedGraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v, w);
  }
  return g;
}

// Hub 0 joined to leaves 1..k.
inline WeightedGraph star_graph(int k) {
  WeightedGraph g(k + 1);
  for (int v = 1; v <= k; ++v) g.add_edge(0, v);
  return g;
}

inline WeightedGraph points_graph(const std::vector<Point>& pts, double extent = 1.0) {
  PointSet ps;
  ps.points = pts;
  ps.grid_extent = extent;
  return WeightedGraph::euclidean(ps);
}

inline std::vector<Point> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

// Exhaustive oracles, independent of the solvers under test.

inline int brute_mvc(const WeightedGraph& g) {
  const int n = g.node_count();
  const auto edges = g.edges();
  int best = n;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const int size = std::popcount(mask);
    if (size >= best) continue;
    bool ok = true;
    for (const auto& e : edges) {
      if (!((mask >> e.u) & 1U) && !((mask >> e.v) & 1U)) {
        ok = false;
        break;
      }
    }
    if (ok) best = size;
  }
  return best;
}

inline double brute_maxcut(const WeightedGraph& g) {
  const int n = g.node_count();
  const auto edges = g.edges();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double cut = 0.0;
    for (const auto& e : edges) {
      if (((mask >> e.u) & 1U) != ((mask >> e.v) & 1U)) cut += e.weight;
    }
    best = std::max(best, cut);
  }
  return best;
}

inline double cyclic_length(const WeightedGraph& g, const std::vector<int>& tour) {
  double len = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) len += g.distance(tour[i], tour[(i + 1) % tour.size()]);
  return len;
}

inline double brute_tsp(const WeightedGraph& g) {
  const int n = g.node_count();
  std::vector<int> rest(static_cast<std::size_t>(n - 1));
  std::iota(rest.begin(), rest.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    if (rest.front() > rest.back()) continue;  // each undirected tour once
    std::vector<int> tour{0};
    tour.insert(tour.end(), rest.begin(), rest.end());
    best = std::min(best, cyclic_length(g, tour));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

inline int brute_scp(const WeightedGraph& g) {
  const int c = g.cover_count();
  const int n = g.node_count();
  int best = std::numeric_limits<int>::max();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << c); ++mask) {
    const int size = std::popcount(mask);
    if (size >= best) continue;
    bool ok = true;
    for (int u = c; u < n && ok; ++u) {
      bool hit = false;
      for (const auto& nb : g.neighbors(u)) hit = hit || ((mask >> nb.id) & 1U);
      ok = hit;
    }
    if (ok) best = size;
  }
  return best;
}

// Node v of g becomes perm[v]. For set cover graphs perm must keep cover nodes first.
inline WeightedGraph relabel(const WeightedGraph& g, const std::vector<int>& perm) {
  WeightedGraph out;
  if (g.kind() == GraphKind::bipartite_scp) {
    out = WeightedGraph::bipartite(g.cover_count(), g.node_count() - g.cover_count());
  } else if (const PointSet* ps = g.points()) {
    PointSet moved = *ps;
    for (std::size_t i = 0; i < perm.size(); ++i) moved.points[static_cast<std::size_t>(perm[i])] = ps->points[i];
    out = WeightedGraph::euclidean(moved);
  } else {
    out = WeightedGraph(g.node_count(), g.kind());
  }
  for (const auto& e : g.edges()) out.add_edge(perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)], e.weight);
  return out;
}

template <class Rng>
std::vector<int> random_relabeling(const WeightedGraph& g, Rng& rng) {
  const int n = g.node_count();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  auto shuffle = [&](int lo, int hi) {
    for (int i = hi - 1; i > lo; --i) {
      const int j = lo + static_cast<int>(rng.below(static_cast<std::size_t>(i - lo + 1)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  };
  if (g.kind() == GraphKind::bipartite_scp) {
    shuffle(0, g.cover_count());
    shuffle(g.cover_count(), n);
  } else {
    shuffle(0, n);
  }
  return perm;
}

inline double harmonic(int k) {
  double h = 0.0;
  for (int i = 1; i <= k; ++i) h += 1.0 / i;
  return h;
}

// Small set cover instance with c cover nodes and u universe nodes, each universe
// node joined to 1..3 random cover nodes.
template <class Rng>
inline WeightedGraph small_scp(int c, int u, Rng& rng) {
  WeightedGraph g = WeightedGraph::bipartite(c, u);
  for (int e = 0; e < u; ++e) {
    const int deg = 1 + static_cast<int>(rng.below(3));
    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < std::min(deg, c)) {
      const int s = static_cast<int>(rng.below(static_cast<std::size_t>(c)));
      if (std::find(picks.begin(), picks.end(), s) == picks.end()) picks.push_back(s);
    }
    for (int s : picks) g.add_edge(s, c + e);
  }
  return g;
}

// Smallest nonzero |pre-activation| of a forward pass, including the Q head of node v.
inline double min_abs_preactivation(const EmbeddingResult& r, const EmbedParams& params, int v) {
  double m = std::numeric_limits<double>::infinity();
  // Exact zeros are structural (no inputs reach that unit) and stay zero under perturbation.
  auto keep = [&](double x) {
    if (x != 0.0) m = std::min(m, std::abs(x));
  };
  auto scan = [&](const std::vector<double>& xs) {
    for (double x : xs) keep(x);
  };
  scan(r.edge_pre);
  for (const auto& x : r.pre) scan(x);
  for (const auto& x : r.extra_pre) scan(x);
  const int p = params.p;
  for (int i = 0; i < p; ++i) {
    double a = 0.0;
    double b = 0.0;
    for (int j = 0; j < p; ++j) {
      a += params.theta6(i, j) * r.pooled[static_cast<std::size_t>(j)];
      b += params.theta7(i, j) * r.mu_row(v)[j];
    }
    keep(a);
    keep(b);
  }
  return m;
}

struct GradCheck {
  int components = 0;
  int mismatches = 0;
  double worst = 0.0;  // largest relative error among components above the absolute floor
};

// Central differences (step 1e-5) of Q(., v) against backward(); a component agrees
// when its relative error is below tol or both values are within 1e-8 of each other.
inline GradCheck finite_difference_check(const WeightedGraph& g, const Features& f, const EmbedParams& params, int v,
                                         double tol = 1e-4) {
  const double h = 1e-5;
  const EmbeddingResult r = embed(g, f, params, true);
  const EmbedParams grad = backward(g, f, params, r, v, 1.0);
  const auto analytic = grad.tensors();
  GradCheck out;
  EmbedParams probe = params;
  const auto slots = probe.tensors();
  for (std::size_t t = 0; t < slots.size(); ++t) {
    for (std::size_t i = 0; i < slots[t]->size(); ++i) {
      const double keep = slots[t]->data[i];
      slots[t]->data[i] = keep + h;
      const double up = q_values(embed(g, f, probe, false), probe)[static_cast<std::size_t>(v)];
      slots[t]->data[i] = keep - h;
      const double down = q_values(embed(g, f, probe, false), probe)[static_cast<std::size_t>(v)];
      slots[t]->data[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[t]->data[i];
      const double diff = std::abs(fd - an);
      ++out.components;
      if (diff <= 1e-8) continue;
      const double rel = diff / std::max(std::abs(fd), std::abs(an));
      out.worst = std::max(out.worst, rel);
      if (rel >= tol) ++out.mismatches;
    }
  }
  return out;
}

inline WeightedGraph small_instance(ProblemKind kind, int n, std::uint64_t seed) {
  switch (kind) {
    case ProblemKind::mvc:
      return gen_barabasi_albert(n, 2, seed);
    case ProblemKind::maxcut:
      return gen_maxcut_weights(gen_barabasi_albert(n, 2, seed), seed + 1);
    case ProblemKind::tsp:
      return knn_graph(gen_tsp_points(n, PointMode::random, seed), 3);
    case ProblemKind::scp:
      return gen_scp(std::max(n, 10), 0.3, seed);
  }
  return {};
}

// Applies a few seeded random actions.
inline EpisodeState partial_state(const WeightedGraph& g, ProblemKind kind, Rng& rng, int steps) {
  EpisodeState s = init_state(g, kind);
  for (int i = 0; i < steps && !terminated(g, s); ++i) {
    const auto c = candidates(g, s);
    apply_inplace(g, s, c[rng.below(c.size())]);
  }
  return s;
}

inline EpisodeState replay_on(const WeightedGraph& g, const EpisodeState& s, const std::vector<int>& perm) {
  EpisodeState out = init_state(g, s.kind);
  for (int v : s.solution) apply_inplace(g, out, perm[static_cast<std::size_t>(v)]);
  return out;
}

}  // namespace gcomb::testing
