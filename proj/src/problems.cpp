#include "gcomb/problems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcomb/errors.hpp"

namespace gcomb {

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::mvc: return "mvc";
    case ProblemKind::maxcut: return "maxcut";
    case ProblemKind::tsp: return "tsp";
    case ProblemKind::scp: return "scp";
  }
  return "mvc";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  if (name == "mvc") return ProblemKind::mvc;
  if (name == "maxcut") return ProblemKind::maxcut;
  if (name == "tsp") return ProblemKind::tsp;
  if (name == "scp") return ProblemKind::scp;
  throw ArgumentError("unknown problem kind '" + std::string(name) + "'");
}

void check_compatible(const WeightedGraph& g, ProblemKind kind) {
  const bool ok = [&] {
    switch (kind) {
      case ProblemKind::mvc:
      case ProblemKind::maxcut:
        return g.kind() != GraphKind::bipartite_scp;
      case ProblemKind::tsp:
        return g.kind() == GraphKind::euclidean;
      case ProblemKind::scp:
        return g.kind() == GraphKind::bipartite_scp;
    }
    return false;
  }();
  if (!ok) {
    throw ArgumentError("graph kind " + std::string(to_string(g.kind())) + " does not fit problem " +
                        std::string(to_string(kind)));
  }
}

EpisodeState init_state(const WeightedGraph& g, ProblemKind kind) {
  check_compatible(g, kind);
  EpisodeState s;
  s.kind = kind;
  s.tags.assign(static_cast<std::size_t>(g.node_count()), 0);
  if (kind == ProblemKind::scp) s.hits.assign(static_cast<std::size_t>(g.node_count()), 0);
  return s;
}

std::vector<int> candidates(const WeightedGraph& g, const EpisodeState& state) {
  std::vector<int> out;
  const int end = state.kind == ProblemKind::scp ? g.cover_count() : g.node_count();
  out.reserve(static_cast<std::size_t>(end));
  for (int v = 0; v < end; ++v) {
    if (!state.contains(v)) out.push_back(v);
  }
  return out;
}

double maxcut_gain(const WeightedGraph& g, const EpisodeState& state, int v) {
  double gain = 0.0;
  for (const auto& nb : g.neighbors(v)) gain += state.contains(nb.id) ? -nb.weight : nb.weight;
  return gain;
}

Insertion cheapest_insertion(const WeightedGraph& g, const std::vector<int>& tour, int v) {
  const std::size_t k = tour.size();
  if (k == 0) return {0.0, 0};
  Insertion best{0.0, 0};
  for (std::size_t i = 0; i < k; ++i) {
    const int a = tour[i];
    const int b = tour[(i + 1) % k];
    const double delta = g.distance(a, v) + g.distance(v, b) - g.distance(a, b);
    if (i == 0 || delta < best.delta) best = {delta, i};
  }
  return best;
}

double tour_length(const WeightedGraph& g, const std::vector<int>& tour) {
  const std::size_t k = tour.size();
  if (k < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0; i < k; ++i) len += g.distance(tour[i], tour[(i + 1) % k]);
  return len;
}

double apply_inplace(const WeightedGraph& g, EpisodeState& s, int v) {
  const int end = s.kind == ProblemKind::scp ? g.cover_count() : g.node_count();
  if (v < 0 || v >= end || s.contains(v)) {
    throw ContractViolation("node " + std::to_string(v) + " is not a candidate");
  }
  double reward = 0.0;
  switch (s.kind) {
    case ProblemKind::mvc:
      for (const auto& nb : g.neighbors(v)) {
        if (!s.contains(nb.id)) ++s.covered;
      }
      reward = -1.0;
      break;
    case ProblemKind::scp:
      for (const auto& nb : g.neighbors(v)) {
        if (s.hits[static_cast<std::size_t>(nb.id)]++ == 0) ++s.covered;
      }
      reward = -1.0;
      break;
    case ProblemKind::maxcut:
      reward = maxcut_gain(g, s, v);
      break;
    case ProblemKind::tsp: {
      const Insertion ins = cheapest_insertion(g, s.tour, v);
      s.tour.insert(s.tour.begin() + static_cast<std::ptrdiff_t>(s.tour.empty() ? 0 : ins.position + 1), v);
      reward = -ins.delta;
      break;
    }
  }
  s.solution.push_back(v);
  s.tags[static_cast<std::size_t>(v)] = 1;
  s.cost += reward;
  return reward;
}

Transition apply(const WeightedGraph& g, const EpisodeState& state, int v) {
  Transition t{state, 0.0};
  t.reward = apply_inplace(g, t.state, v);
  return t;
}

bool terminated(const WeightedGraph& g, const EpisodeState& s) {
  switch (s.kind) {
    case ProblemKind::mvc:
      return s.covered == g.edge_count();
    case ProblemKind::scp:
      return s.covered == static_cast<std::size_t>(g.node_count() - g.cover_count());
    case ProblemKind::tsp:
      return s.solution.size() == static_cast<std::size_t>(g.node_count());
    case ProblemKind::maxcut:
      // Stop once no candidate strictly improves the cut. The relative tolerance
      // absorbs rounding when a gain is an exact tie between the two sums.
      for (int v = 0; v < g.node_count(); ++v) {
        if (s.contains(v)) continue;
        double pos = 0.0;
        double neg = 0.0;
        for (const auto& nb : g.neighbors(v)) (s.contains(nb.id) ? neg : pos) += nb.weight;
        if (pos - neg > 1e-12 * (pos + neg)) return false;
      }
      return true;
  }
  return true;
}

double cut_weight(const WeightedGraph& g, const std::vector<std::uint8_t>& side) {
  double total = 0.0;
  for (const auto& e : g.edges()) {
    if (side[static_cast<std::size_t>(e.u)] != side[static_cast<std::size_t>(e.v)]) total += e.weight;
  }
  return total;
}

double recompute_cost(const WeightedGraph& g, const EpisodeState& s) {
  switch (s.kind) {
    case ProblemKind::mvc:
    case ProblemKind::scp:
      return -static_cast<double>(s.solution.size());
    case ProblemKind::maxcut:
      return cut_weight(g, s.tags);
    case ProblemKind::tsp:
      return -tour_length(g, s.tour);
  }
  return 0.0;
}

double solution_value(const WeightedGraph& g, const EpisodeState& s) {
  if (!terminated(g, s)) throw ContractViolation("solution_value called on a non-terminal state");
  return recompute_cost(g, s);
}

double natural_value(ProblemKind kind, double signed_value) {
  return kind == ProblemKind::maxcut ? signed_value : -signed_value;
}

bool is_vertex_cover(const WeightedGraph& g, const std::vector<int>& nodes) {
  std::vector<char> in(static_cast<std::size_t>(g.node_count()), 0);
  for (int v : nodes) {
    if (v < 0 || v >= g.node_count()) return false;
    in[static_cast<std::size_t>(v)] = 1;
  }
  for (const auto& e : g.edges()) {
    if (!in[static_cast<std::size_t>(e.u)] && !in[static_cast<std::size_t>(e.v)]) return false;
  }
  return true;
}

bool is_set_cover(const WeightedGraph& g, const std::vector<int>& cover_nodes) {
  std::vector<char> hit(static_cast<std::size_t>(g.node_count()), 0);
  for (int c : cover_nodes) {
    if (c < 0 || c >= g.cover_count()) return false;
    for (const auto& nb : g.neighbors(c)) hit[static_cast<std::size_t>(nb.id)] = 1;
  }
  for (int u = g.cover_count(); u < g.node_count(); ++u) {
    if (!hit[static_cast<std::size_t>(u)]) return false;
  }
  return true;
}

bool is_tour(const std::vector<int>& tour, int n) {
  if (static_cast<int>(tour.size()) != n) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : tour) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

}  // namespace gcomb
