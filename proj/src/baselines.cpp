#include "gcomb/baselines.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "gcomb/errors.hpp"
#include "gcomb/rng.hpp"

namespace gcomb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<int> mvc_approx(const WeightedGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<char> in(static_cast<std::size_t>(g.node_count()), 0);
  std::vector<Edge> uncovered = g.edges();
  std::vector<int> cover;
  while (!uncovered.empty()) {
    const Edge e = uncovered[rng.below(uncovered.size())];
    for (int v : {e.u, e.v}) {
      in[static_cast<std::size_t>(v)] = 1;
      cover.push_back(v);
    }
    std::erase_if(uncovered, [&](const Edge& x) {
      return in[static_cast<std::size_t>(x.u)] || in[static_cast<std::size_t>(x.v)];
    });
  }
  std::sort(cover.begin(), cover.end());
  return cover;
}

std::vector<int> mvc_approx_greedy(const WeightedGraph& g) {
  const int n = g.node_count();
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  std::vector<int> residual(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) residual[static_cast<std::size_t>(v)] = g.degree(v);
  std::vector<int> cover;
  for (;;) {
    int best_u = -1;
    int best_v = -1;
    int best = -1;
    for (int u = 0; u < n; ++u) {
      if (in[static_cast<std::size_t>(u)]) continue;
      for (const auto& nb : g.neighbors(u)) {
        if (nb.id <= u || in[static_cast<std::size_t>(nb.id)]) continue;
        const int s = residual[static_cast<std::size_t>(u)] + residual[static_cast<std::size_t>(nb.id)];
        if (s > best) {
          best = s;
          best_u = u;
          best_v = nb.id;
        }
      }
    }
    if (best_u < 0) break;
    for (int v : {best_u, best_v}) {
      in[static_cast<std::size_t>(v)] = 1;
      cover.push_back(v);
      for (const auto& nb : g.neighbors(v)) {
        if (!in[static_cast<std::size_t>(nb.id)]) --residual[static_cast<std::size_t>(nb.id)];
      }
      residual[static_cast<std::size_t>(v)] = 0;
    }
  }
  std::sort(cover.begin(), cover.end());
  return cover;
}

std::vector<std::uint8_t> maxcut_approx(const WeightedGraph& g) {
  const int n = g.node_count();
  std::vector<std::uint8_t> side(static_cast<std::size_t>(n), 0);
  for (;;) {
    int best_v = -1;
    double best_gain = 0.0;
    for (int v = 0; v < n; ++v) {
      double same = 0.0;
      double across = 0.0;
      for (const auto& nb : g.neighbors(v)) {
        (side[static_cast<std::size_t>(nb.id)] == side[static_cast<std::size_t>(v)] ? same : across) += nb.weight;
      }
      const double gain = same - across;
      if (gain > 1e-12 * (same + across) && gain > best_gain) {
        best_gain = gain;
        best_v = v;
      }
    }
    if (best_v < 0) break;
    side[static_cast<std::size_t>(best_v)] ^= 1;
  }
  return side;
}

std::string_view to_string(InsertionStrategy s) {
  switch (s) {
    case InsertionStrategy::nearest: return "nearest";
    case InsertionStrategy::farthest: return "farthest";
    case InsertionStrategy::cheapest: return "cheapest";
    case InsertionStrategy::closest: return "closest";
  }
  return "nearest";
}

namespace {

std::vector<int> trivial_tour(int n) {
  std::vector<int> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = i;
  return t;
}

// Position k such that inserting v between tour[k] and tour[k+1] is cheapest.
std::pair<double, std::size_t> best_position(const WeightedGraph& g, const std::vector<int>& tour, int v) {
  double best = kInf;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    const int a = tour[i];
    const int b = tour[(i + 1) % tour.size()];
    const double d = g.distance(a, v) + g.distance(v, b) - g.distance(a, b);
    if (d < best) {
      best = d;
      pos = i;
    }
  }
  return {best, pos};
}

}  // namespace

std::vector<int> tsp_insertion(const WeightedGraph& g, InsertionStrategy strategy) {
  const int n = g.node_count();
  if (n <= 3) return trivial_tour(n);
  std::vector<int> tour{0};
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  in[0] = 1;
  // dist_to_tour[v]: distance from v to the nearest tour node
  std::vector<double> dist_to_tour(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) dist_to_tour[static_cast<std::size_t>(v)] = g.distance(0, v);

  while (static_cast<int>(tour.size()) < n) {
    int pick = -1;
    std::size_t pos = 0;
    if (strategy == InsertionStrategy::cheapest) {
      double best = kInf;
      for (int v = 0; v < n; ++v) {
        if (in[static_cast<std::size_t>(v)]) continue;
        auto [cost, at] = best_position(g, tour, v);
        if (cost < best) {
          best = cost;
          pick = v;
          pos = at;
        }
      }
    } else {
      const bool farthest = strategy == InsertionStrategy::farthest;
      double best = farthest ? -kInf : kInf;
      for (int v = 0; v < n; ++v) {
        if (in[static_cast<std::size_t>(v)]) continue;
        const double d = dist_to_tour[static_cast<std::size_t>(v)];
        if (farthest ? d > best : d < best) {
          best = d;
          pick = v;
        }
      }
      pos = best_position(g, tour, pick).second;
    }
    tour.insert(tour.begin() + static_cast<std::ptrdiff_t>(pos + 1), pick);
    in[static_cast<std::size_t>(pick)] = 1;
    for (int v = 0; v < n; ++v) {
      dist_to_tour[static_cast<std::size_t>(v)] = std::min(dist_to_tour[static_cast<std::size_t>(v)], g.distance(pick, v));
    }
  }
  return tour;
}

std::vector<int> tsp_nearest_neighbor(const WeightedGraph& g) {
  const int n = g.node_count();
  if (n == 0) return {};
  std::vector<int> tour{0};
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  seen[0] = 1;
  int cur = 0;
  while (static_cast<int>(tour.size()) < n) {
    int next = -1;
    double best = kInf;
    for (int v = 0; v < n; ++v) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      const double d = g.distance(cur, v);
      if (d < best) {
        best = d;
        next = v;
      }
    }
    seen[static_cast<std::size_t>(next)] = 1;
    tour.push_back(next);
    cur = next;
  }
  return tour;
}

std::vector<int> tsp_mst(const WeightedGraph& g) {
  const int n = g.node_count();
  if (n == 0) return {};
  std::vector<double> key(static_cast<std::size_t>(n), kInf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  key[0] = 0.0;
  for (int it = 0; it < n; ++it) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      if (!in[static_cast<std::size_t>(v)] && (u < 0 || key[static_cast<std::size_t>(v)] < key[static_cast<std::size_t>(u)])) u = v;
    }
    in[static_cast<std::size_t>(u)] = 1;
    for (int v = 0; v < n; ++v) {
      if (in[static_cast<std::size_t>(v)]) continue;
      const double d = g.distance(u, v);
      if (d < key[static_cast<std::size_t>(v)]) {
        key[static_cast<std::size_t>(v)] = d;
        parent[static_cast<std::size_t>(v)] = u;
      }
    }
  }
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int v = 1; v < n; ++v) children[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])].push_back(v);
  std::vector<int> tour;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    tour.push_back(u);
    const auto& ch = children[static_cast<std::size_t>(u)];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return tour;
}

std::vector<int> tsp_two_opt(const WeightedGraph& g, std::vector<int> tour) {
  const std::size_t n = tour.size();
  if (n < 4) return tour;
  for (;;) {
    double best = 0.0;
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // the two edges share node tour[0]
        const int a = tour[i];
        const int b = tour[i + 1];
        const int c = tour[j];
        const int d = tour[(j + 1) % n];
        const double delta = g.distance(a, c) + g.distance(b, d) - g.distance(a, b) - g.distance(c, d);
        if (delta < best - 1e-12 * (g.distance(a, b) + g.distance(c, d))) {
          best = delta;
          bi = i;
          bj = j;
        }
      }
    }
    if (best >= 0.0) break;
    std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(bi + 1), tour.begin() + static_cast<std::ptrdiff_t>(bj + 1));
  }
  return tour;
}

std::vector<int> scp_greedy(const WeightedGraph& g) {
  const int cover = g.cover_count();
  const int n = g.node_count();
  for (int u = cover; u < n; ++u) {
    if (g.degree(u) == 0) throw InfeasibleError("universe node " + std::to_string(u) + " belongs to no subset");
  }
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<char> chosen(static_cast<std::size_t>(cover), 0);
  int remaining = n - cover;
  std::vector<int> out;
  while (remaining > 0) {
    int best = -1;
    int best_gain = 0;
    for (int c = 0; c < cover; ++c) {
      if (chosen[static_cast<std::size_t>(c)]) continue;
      int gain = 0;
      for (const auto& nb : g.neighbors(c)) gain += covered[static_cast<std::size_t>(nb.id)] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    chosen[static_cast<std::size_t>(best)] = 1;
    out.push_back(best);
    for (const auto& nb : g.neighbors(best)) {
      if (!covered[static_cast<std::size_t>(nb.id)]) {
        covered[static_cast<std::size_t>(nb.id)] = 1;
        --remaining;
      }
    }
  }
  return out;
}

}  // namespace gcomb
