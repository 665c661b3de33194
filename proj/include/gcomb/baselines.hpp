#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gcomb/graph.hpp"

namespace gcomb {

// Classical heuristics used as reference points for the learned policy.
// All of them are deterministic given their arguments.

// 2-approximation: pick a uniformly random uncovered edge, take both endpoints.
std::vector<int> mvc_approx(const WeightedGraph& g, std::uint64_t seed);

// Take both endpoints of the uncovered edge with the largest residual degree sum.
// Degrees count uncovered edges only; ties go to the lexicographically smallest (u, v).
std::vector<int> mvc_approx_greedy(const WeightedGraph& g);

// Single-node-move local search from the all-on-one-side cut, always taking the
// move with the largest strictly positive gain (lowest node id on ties).
// Returns the side assignment (1 = moved side).
std::vector<std::uint8_t> maxcut_approx(const WeightedGraph& g);

enum class InsertionStrategy { nearest, farthest, cheapest, closest };
std::string_view to_string(InsertionStrategy s);

// Insertion heuristics over the full point metric. The tour starts at node 0;
// node selection follows the strategy, insertion is at the minimum-increase
// position, and every tie goes to the lowest index.
//   nearest / closest : the outside node closest to the tour
//   farthest          : the outside node whose distance to the tour is largest
//   cheapest          : the outside node with the smallest insertion cost
// `nearest` and `closest` coincide under these definitions; both names are kept.
std::vector<int> tsp_insertion(const WeightedGraph& g, InsertionStrategy strategy);

// Start at node 0, always move to the nearest unvisited node.
std::vector<int> tsp_nearest_neighbor(const WeightedGraph& g);

// Preorder walk of a Prim minimum spanning tree rooted at node 0.
std::vector<int> tsp_mst(const WeightedGraph& g);

// Best-improvement 2-opt until no exchange shortens the tour.
std::vector<int> tsp_two_opt(const WeightedGraph& g, std::vector<int> tour);

// Repeatedly take the cover node with the most uncovered universe neighbours
// (lowest id on ties). Throws InfeasibleError if some universe node has no neighbour.
std::vector<int> scp_greedy(const WeightedGraph& g);

}  // namespace gcomb
