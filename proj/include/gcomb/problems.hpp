#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gcomb/graph.hpp"

namespace gcomb {

enum class ProblemKind { mvc, maxcut, tsp, scp };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

/// Partial solution of one greedy episode.
///
/// `solution` is the ordered node list S and `tags[v]` is 1 iff v is in S. The
/// helper fields hold h(S) for the problem at hand:
///   MVC     covered = number of covered edges
///   SCP     covered = number of covered universe nodes, hits[u] = selected neighbours of u
///   MAXCUT  tags are the side assignment, cost is the cut weight
///   TSP     tour = cyclic node order built by cheapest insertion
/// `cost` is c(h(S), G) under the signed convention (-|S| for MVC/SCP, cut weight,
/// minus the tour length for TSP), accumulated from the rewards.
struct EpisodeState {
  ProblemKind kind = ProblemKind::mvc;
  std::vector<int> solution;
  std::vector<std::uint8_t> tags;
  std::size_t covered = 0;
  std::vector<int> hits;
  std::vector<int> tour;
  double cost = 0.0;

  bool contains(int v) const { return tags[static_cast<std::size_t>(v)] != 0; }
};

struct Transition {
  EpisodeState state;
  double reward;  // raw c(h(S')) - c(h(S))
};

void check_compatible(const WeightedGraph& g, ProblemKind kind);

EpisodeState init_state(const WeightedGraph& g, ProblemKind kind);

// V \ S for MVC, MAXCUT and TSP; C \ S for SCP. Ascending node id.
std::vector<int> candidates(const WeightedGraph& g, const EpisodeState& state);

Transition apply(const WeightedGraph& g, const EpisodeState& state, int v);
// In-place variant used by rollouts; returns the raw reward.
double apply_inplace(const WeightedGraph& g, EpisodeState& state, int v);

bool terminated(const WeightedGraph& g, const EpisodeState& state);

// c(h(S), G) recomputed from the helper structure, signed convention.
double recompute_cost(const WeightedGraph& g, const EpisodeState& state);

// Objective of a terminal state, signed convention; recomputed from scratch.
double solution_value(const WeightedGraph& g, const EpisodeState& state);

// Cut gain of moving candidate v into S: weight to nodes outside S minus weight into S.
double maxcut_gain(const WeightedGraph& g, const EpisodeState& state, int v);

// Increase of the tour length when v is inserted at its cheapest position, and that
// position (v goes between tour[pos] and tour[pos + 1 mod k]). Lowest position wins ties.
struct Insertion {
  double delta;
  std::size_t position;
};
Insertion cheapest_insertion(const WeightedGraph& g, const std::vector<int>& tour, int v);

double tour_length(const WeightedGraph& g, const std::vector<int>& tour);

// Positive ("natural") objective: cover size, cut weight, tour length.
double natural_value(ProblemKind kind, double signed_value);

// Feasibility predicates shared with the baselines and exact solvers.
bool is_vertex_cover(const WeightedGraph& g, const std::vector<int>& nodes);
bool is_set_cover(const WeightedGraph& g, const std::vector<int>& cover_nodes);
bool is_tour(const std::vector<int>& tour, int n);
double cut_weight(const WeightedGraph& g, const std::vector<std::uint8_t>& side);

}  // namespace gcomb
