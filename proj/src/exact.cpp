#include "gcomb/exact.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "gcomb/errors.hpp"
#include "gcomb/problems.hpp"

namespace gcomb {

namespace {

using Mask = std::uint64_t;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_limit(const char* what, int n, int limit) {
  if (n > limit) {
    throw SizeLimitError(std::string(what) + ": " + std::to_string(n) + " nodes exceeds the limit of " +
                         std::to_string(limit));
  }
}

Mask bit(int v) { return Mask{1} << v; }

std::vector<int> mask_nodes(Mask m) {
  std::vector<int> out;
  while (m) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

// ---- MVC ----------------------------------------------------------------------

class MvcSolver {
 public:
  explicit MvcSolver(const WeightedGraph& g) : n_(g.node_count()), adj_(static_cast<std::size_t>(n_), 0) {
    for (int v = 0; v < n_; ++v) {
      for (const auto& nb : g.neighbors(v)) adj_[static_cast<std::size_t>(v)] |= bit(nb.id);
    }
  }

  Mask solve() {
    best_size_ = n_ + 1;
    best_ = 0;
    Mask all = n_ == 64 ? ~Mask{0} : bit(n_) - 1;
    // Any vertex set is a cover once every vertex is in it; start from the full set as incumbent.
    best_ = all;
    best_size_ = n_;
    search(all, 0, 0);
    return best_;
  }

 private:
  int deg(int v, Mask live) const { return std::popcount(adj_[static_cast<std::size_t>(v)] & live); }

  // Greedy maximal matching in the live subgraph: a lower bound on its cover size.
  int matching_bound(Mask live) const {
    int m = 0;
    Mask free = live;
    while (free) {
      const int v = std::countr_zero(free);
      free &= ~bit(v);
      const Mask nb = adj_[static_cast<std::size_t>(v)] & free;
      if (nb) {
        free &= ~bit(std::countr_zero(nb));
        ++m;
      }
    }
    return m;
  }

  // Exact cover size for a live subgraph of maximum degree <= 2 (paths and cycles).
  int paths_and_cycles(Mask live, Mask& chosen) const {
    int total = 0;
    Mask left = live;
    while (left) {
      // Walk a component from an endpoint when there is one.
      int start = -1;
      Mask comp = 0;
      Mask stack = bit(std::countr_zero(left));
      while (stack) {
        const int v = std::countr_zero(stack);
        stack &= ~bit(v);
        if (comp & bit(v)) continue;
        comp |= bit(v);
        stack |= adj_[static_cast<std::size_t>(v)] & live & ~comp;
      }
      left &= ~comp;
      bool cycle = true;
      for (Mask c = comp; c; c &= c - 1) {
        const int v = std::countr_zero(c);
        if (deg(v, live) < 2) {
          cycle = false;
          start = v;
          break;
        }
      }
      if (start < 0) start = std::countr_zero(comp);
      // Walk the component in order and take every second vertex, starting with the
      // second one; for odd cycles the last vertex is also needed.
      std::vector<int> order;
      Mask seen = 0;
      int cur = start;
      while (cur >= 0) {
        order.push_back(cur);
        seen |= bit(cur);
        const Mask next = adj_[static_cast<std::size_t>(cur)] & live & ~seen;
        cur = next ? std::countr_zero(next) : -1;
      }
      for (std::size_t i = 1; i < order.size(); i += 2) chosen |= bit(order[i]);
      int k = static_cast<int>(order.size()) / 2;
      if (cycle && order.size() % 2 == 1) {
        chosen |= bit(order.back());
        ++k;
      }
      total += k;
    }
    return total;
  }

  // live: vertices still in the residual graph. chosen: cover so far.
  void search(Mask live, Mask chosen, int size) {
    // Reductions until none applies.
    for (bool changed = true; changed;) {
      changed = false;
      for (Mask l = live; l; l &= l - 1) {
        const int v = std::countr_zero(l);
        if (!(live & bit(v))) continue;
        const Mask nb = adj_[static_cast<std::size_t>(v)] & live;
        const int d = std::popcount(nb);
        if (d == 0) {
          live &= ~bit(v);
          changed = true;
        } else if (d == 1) {
          const int u = std::countr_zero(nb);
          chosen |= bit(u);
          ++size;
          live &= ~(bit(u) | bit(v));
          changed = true;
        } else {
          // Dominance: a neighbour u whose closed neighbourhood contains v's can be taken.
          const Mask closed_v = nb | bit(v);
          for (Mask c = nb; c; c &= c - 1) {
            const int u = std::countr_zero(c);
            const Mask closed_u = (adj_[static_cast<std::size_t>(u)] & live) | bit(u);
            if ((closed_v & ~closed_u) == 0) {
              chosen |= bit(u);
              ++size;
              live &= ~bit(u);
              changed = true;
              break;
            }
          }
        }
      }
    }
    if (size >= best_size_) return;
    if (live == 0) {
      best_size_ = size;
      best_ = chosen;
      return;
    }
    if (size + matching_bound(live) >= best_size_) return;

    int branch = -1;
    int max_deg = -1;
    for (Mask l = live; l; l &= l - 1) {
      const int v = std::countr_zero(l);
      const int d = deg(v, live);
      if (d > max_deg) {
        max_deg = d;
        branch = v;
      }
    }
    if (max_deg <= 2) {
      Mask extra = 0;
      const int k = paths_and_cycles(live, extra);
      if (size + k < best_size_) {
        best_size_ = size + k;
        best_ = chosen | extra;
      }
      return;
    }
    const Mask nb = adj_[static_cast<std::size_t>(branch)] & live;
    search(live & ~bit(branch), chosen | bit(branch), size + 1);
    search(live & ~nb & ~bit(branch), chosen | nb, size + std::popcount(nb));
  }

  int n_;
  std::vector<Mask> adj_;
  Mask best_ = 0;
  int best_size_ = 0;
};

// ---- SCP ----------------------------------------------------------------------

class ScpSolver {
 public:
  ScpSolver(const WeightedGraph& g) : cover_(g.cover_count()) {
    const int n = g.node_count();
    universe_ = n - cover_;
    sets_.assign(static_cast<std::size_t>(cover_), 0);
    for (int c = 0; c < cover_; ++c) {
      for (const auto& nb : g.neighbors(c)) sets_[static_cast<std::size_t>(c)] |= bit(nb.id - cover_);
    }
    full_ = universe_ == 64 ? ~Mask{0} : bit(universe_) - 1;
  }

  std::vector<int> solve() {
    // Greedy incumbent.
    Mask covered = 0;
    std::vector<int> greedy;
    while (covered != full_) {
      int best = -1;
      int gain = 0;
      for (int c = 0; c < cover_; ++c) {
        const int gc = std::popcount(sets_[static_cast<std::size_t>(c)] & ~covered);
        if (gc > gain) {
          gain = gc;
          best = c;
        }
      }
      greedy.push_back(best);
      covered |= sets_[static_cast<std::size_t>(best)];
    }
    best_ = greedy;
    std::vector<int> chosen;
    search(0, chosen);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  int lower_bound(Mask covered) const {
    const int need = std::popcount(full_ & ~covered);
    if (need == 0) return 0;
    std::vector<int> gains;
    gains.reserve(static_cast<std::size_t>(cover_));
    for (int c = 0; c < cover_; ++c) gains.push_back(std::popcount(sets_[static_cast<std::size_t>(c)] & ~covered));
    std::sort(gains.begin(), gains.end(), std::greater<>());
    int sum = 0;
    for (std::size_t k = 0; k < gains.size(); ++k) {
      sum += gains[k];
      if (sum >= need) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(gains.size()) + 1;
  }

  void search(Mask covered, std::vector<int>& chosen) {
    if (covered == full_) {
      if (chosen.size() < best_.size()) best_ = chosen;
      return;
    }
    if (chosen.size() + static_cast<std::size_t>(lower_bound(covered)) >= best_.size()) return;
    const int e = std::countr_zero(full_ & ~covered);
    std::vector<int> options;
    for (int c = 0; c < cover_; ++c) {
      if (sets_[static_cast<std::size_t>(c)] & bit(e)) options.push_back(c);
    }
    std::stable_sort(options.begin(), options.end(), [&](int a, int b) {
      return std::popcount(sets_[static_cast<std::size_t>(a)] & ~covered) >
             std::popcount(sets_[static_cast<std::size_t>(b)] & ~covered);
    });
    for (int c : options) {
      chosen.push_back(c);
      search(covered | sets_[static_cast<std::size_t>(c)], chosen);
      chosen.pop_back();
    }
  }

  int cover_;
  int universe_ = 0;
  Mask full_ = 0;
  std::vector<Mask> sets_;
  std::vector<int> best_;
};

}  // namespace

OptResult mvc_exact(const WeightedGraph& g, int node_limit) {
  const auto start = Clock::now();
  if (g.kind() == GraphKind::bipartite_scp) throw ArgumentError("mvc_exact: graph kind must be general or euclidean");
  check_limit("mvc_exact", g.node_count(), std::min(node_limit, 64));
  OptResult r;
  if (g.node_count() > 0) {
    MvcSolver solver(g);
    r.nodes = mask_nodes(solver.solve());
  }
  r.value = static_cast<double>(r.nodes.size());
  r.proven_optimal = true;
  r.elapsed = seconds_since(start);
  return r;
}

OptResult maxcut_exact(const WeightedGraph& g, int node_limit) {
  const auto start = Clock::now();
  const int n = g.node_count();
  check_limit("maxcut_exact", n, std::min(node_limit, 62));
  OptResult r;
  r.side.assign(static_cast<std::size_t>(n), 0);
  r.proven_optimal = true;
  if (n < 2) {
    r.elapsed = seconds_since(start);
    return r;
  }
  // Gray code over nodes 1..n-1; node 0 stays on side 0.
  std::vector<std::uint8_t> side(static_cast<std::size_t>(n), 0);
  double cut = 0.0;
  double best = 0.0;
  Mask best_code = 0;
  Mask code = 0;
  const Mask count = Mask{1} << (n - 1);
  for (Mask i = 1; i < count; ++i) {
    const int v = std::countr_zero(i) + 1;
    double same = 0.0;
    double across = 0.0;
    for (const auto& nb : g.neighbors(v)) {
      (side[static_cast<std::size_t>(nb.id)] == side[static_cast<std::size_t>(v)] ? same : across) += nb.weight;
    }
    cut += same - across;
    side[static_cast<std::size_t>(v)] ^= 1;
    code ^= bit(v);
    if (cut > best) {
      best = cut;
      best_code = code;
    }
  }
  for (int v = 1; v < n; ++v) r.side[static_cast<std::size_t>(v)] = (best_code >> v) & 1;
  r.value = cut_weight(g, r.side);
  r.elapsed = seconds_since(start);
  return r;
}

OptResult tsp_exact(const WeightedGraph& g, int node_limit) {
  const auto start = Clock::now();
  const int n = g.node_count();
  if (g.kind() != GraphKind::euclidean) throw ArgumentError("tsp_exact: graph kind must be euclidean");
  if (n < 2) throw ArgumentError("tsp_exact: needs at least 2 points");
  check_limit("tsp_exact", n, std::min(node_limit, 24));
  OptResult r;
  r.proven_optimal = true;
  if (n == 2) {
    r.nodes = {0, 1};
    r.value = tour_length(g, r.nodes);
    r.elapsed = seconds_since(start);
    return r;
  }
  // dp[S][j]: shortest path from 0 through the set S of nodes 1..n-1, ending at j in S.
  const int m = n - 1;
  const std::size_t subsets = std::size_t{1} << m;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(subsets * static_cast<std::size_t>(m), inf);
  std::vector<std::int8_t> parent(subsets * static_cast<std::size_t>(m), -1);
  std::vector<double> dist(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) dist[static_cast<std::size_t>(a * n + b)] = g.distance(a, b);
  }
  auto d = [&](int a, int b) { return dist[static_cast<std::size_t>(a * n + b)]; };
  auto at = [&](std::size_t s, int j) -> std::size_t { return s * static_cast<std::size_t>(m) + static_cast<std::size_t>(j); };
  for (int j = 0; j < m; ++j) dp[at(std::size_t{1} << j, j)] = d(0, j + 1);
  for (std::size_t s = 1; s < subsets; ++s) {
    for (int j = 0; j < m; ++j) {
      if (!(s & (std::size_t{1} << j))) continue;
      const double base = dp[at(s, j)];
      if (base == inf) continue;
      for (int k = 0; k < m; ++k) {
        if (s & (std::size_t{1} << k)) continue;
        const std::size_t t = s | (std::size_t{1} << k);
        const double cand = base + d(j + 1, k + 1);
        if (cand < dp[at(t, k)]) {
          dp[at(t, k)] = cand;
          parent[at(t, k)] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  const std::size_t full = subsets - 1;
  double best = inf;
  int last = -1;
  for (int j = 0; j < m; ++j) {
    const double c = dp[at(full, j)] + d(j + 1, 0);
    if (c < best) {
      best = c;
      last = j;
    }
  }
  std::vector<int> rev;
  std::size_t s = full;
  int j = last;
  while (j >= 0) {
    rev.push_back(j + 1);
    const int p = parent[at(s, j)];
    s &= ~(std::size_t{1} << j);
    j = p;
  }
  r.nodes.push_back(0);
  r.nodes.insert(r.nodes.end(), rev.rbegin(), rev.rend());
  r.value = tour_length(g, r.nodes);
  r.elapsed = seconds_since(start);
  return r;
}

OptResult scp_exact(const WeightedGraph& g, int node_limit) {
  const auto start = Clock::now();
  if (g.kind() != GraphKind::bipartite_scp) throw ArgumentError("scp_exact: graph kind must be bipartite_scp");
  const int n = g.node_count();
  check_limit("scp_exact", n, node_limit);
  if (n - g.cover_count() > 64) throw SizeLimitError("scp_exact: universe larger than 64 elements");
  for (int u = g.cover_count(); u < n; ++u) {
    if (g.degree(u) == 0) throw InfeasibleError("scp_exact: universe node " + std::to_string(u) + " belongs to no subset");
  }
  OptResult r;
  ScpSolver solver(g);
  r.nodes = solver.solve();
  r.value = static_cast<double>(r.nodes.size());
  r.proven_optimal = true;
  r.elapsed = seconds_since(start);
  return r;
}

double approx_ratio(double solution_value, double opt_value) {
  if (!(solution_value > 0.0) || !(opt_value > 0.0) || !std::isfinite(solution_value) || !std::isfinite(opt_value)) {
    throw ArgumentError("approx_ratio: values must be finite and strictly positive");
  }
  return std::max(opt_value / solution_value, solution_value / opt_value);
}

}  // namespace gcomb
