#pragma once

#include <cstdint>
#include <vector>

#include "gcomb/graph.hpp"

namespace gcomb {

/// Result of an exact solver. `value` uses the natural positive objective
/// (cover size, cut weight, tour length). `nodes` is the cover for MVC/SCP and the
/// tour for TSP; `side` is the MAXCUT assignment.
struct OptResult {
  double value = 0.0;
  std::vector<int> nodes;
  std::vector<std::uint8_t> side;
  bool proven_optimal = false;
  double elapsed = 0.0;  // seconds
};

// Node limits keep each call to a few seconds on one core.
inline constexpr int kMvcExactLimit = 64;
inline constexpr int kMaxcutExactLimit = 24;
inline constexpr int kTspExactLimit = 17;
inline constexpr int kScpExactLimit = 60;

// Branch and bound: branch on a maximum-degree vertex (take it, or take all its
// neighbours) after degree-0, degree-1 and dominance reductions; bounded below by a
// greedy matching.
OptResult mvc_exact(const WeightedGraph& g, int node_limit = kMvcExactLimit);

// Gray-code enumeration of the 2^(n-1) bipartitions with node 0 fixed.
OptResult maxcut_exact(const WeightedGraph& g, int node_limit = kMaxcutExactLimit);

// Held-Karp over subsets, full point metric.
OptResult tsp_exact(const WeightedGraph& g, int node_limit = kTspExactLimit);

// Branch and bound on the lowest uncovered element, greedy incumbent and a
// max-coverage lower bound.
OptResult scp_exact(const WeightedGraph& g, int node_limit = kScpExactLimit);

// max(opt / value, value / opt); both arguments must be strictly positive.
double approx_ratio(double solution_value, double opt_value);

}  // namespace gcomb
