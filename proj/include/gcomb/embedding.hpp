#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcomb/graph.hpp"
#include "gcomb/problems.hpp"

namespace gcomb {

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  std::size_t size() const { return data.size(); }
  bool operator==(const Matrix&) const = default;
};

/// Parameters of the embedding network and its Q head.
///
/// Shapes: theta1 p x d_node, theta2/theta3 p x p, theta4 p x d_edge, theta5 1 x 2p,
/// theta6/theta7 p x p. `extra` is the optional p x p relu layer applied to the
/// neighbour sum before theta2; it is empty unless extra_layer is set.
/// Gradients use the same type.
struct EmbedParams {
  int p = 0;
  int T = 0;
  int d_node = 0;
  int d_edge = 0;
  bool extra_layer = false;
  Matrix theta1, theta2, theta3, theta4, theta5, theta6, theta7, extra;

  static EmbedParams zeros(int p, int T, int d_node, int d_edge, bool extra_layer = false);
  EmbedParams zeros_like() const { return zeros(p, T, d_node, d_edge, extra_layer); }

  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;

  // this += alpha * other (shapes must match)
  void axpy(double alpha, const EmbedParams& other);
  void scale(double alpha);
  void set_zero();
  bool all_finite() const;
  double squared_norm() const;
  bool operator==(const EmbedParams&) const = default;
};

EmbedParams init_params(int p, int d_node, int d_edge, int T, std::uint64_t seed, bool extra_layer = false);

struct FeatureDims {
  int d_node;
  int d_edge;
};
// covered_edges adds an edge column for MVC and SCP marking edges already covered.
FeatureDims feature_dims(ProblemKind kind, bool covered_edges = false);

// Default iteration count per problem kind (MVC 5, MAXCUT 3, TSP 4, SCP 5).
int default_iterations(ProblemKind kind);

/// Node and directed-edge features of a tagged graph.
/// Edge rows follow adjacency order: rows [offset[v], offset[v+1]) belong to v's neighbours.
struct Features {
  int d_node = 0;
  int d_edge = 0;
  std::vector<double> node;
  std::vector<double> edge;
  std::vector<std::size_t> offset;

  const double* node_row(int v) const { return node.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(d_node); }
  const double* edge_row(std::size_t idx) const { return edge.data() + idx * static_cast<std::size_t>(d_edge); }
};

// d_edge selects the edge layout a model was built for; 0 takes the default.
Features node_features(const EpisodeState& state, const WeightedGraph& g, int d_edge = 0);

/// Forward pass output. mu and pooled are always present; the per-sweep
/// activations are kept only when embed() is asked to retain them.
struct EmbeddingResult {
  int n = 0;
  int p = 0;
  int T = 0;
  std::vector<double> mu;      // n x p, final sweep
  std::vector<double> pooled;  // p, sum of mu rows

  bool retained = false;
  std::vector<double> edge_pre;               // directed edges x p: theta4 * e_vu
  std::vector<double> edge_sum;               // n x p: sum_u relu(theta4 * e_vu)
  std::vector<std::vector<double>> nbr;       // sweep t (0-based): n x p neighbour sums of mu^(t)
  std::vector<std::vector<double>> extra_pre; // sweep t: n x p pre-activation of the extra layer
  std::vector<std::vector<double>> pre;       // sweep t: n x p pre-activation of mu^(t+1)

  const double* mu_row(int v) const { return mu.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(p); }
};

EmbeddingResult embed(const WeightedGraph& g, const Features& features, const EmbedParams& params,
                      bool retain = true);

// Q(h(S), v) for every node v.
std::vector<double> q_values(const EmbeddingResult& result, const EmbedParams& params);

// Adds upstream * dQ(v)/dTheta into grad. Requires a retained forward pass.
void accumulate_gradient(const WeightedGraph& g, const Features& features, const EmbedParams& params,
                         const EmbeddingResult& result, int v, double upstream, EmbedParams& grad);

EmbedParams backward(const WeightedGraph& g, const Features& features, const EmbedParams& params,
                     const EmbeddingResult& result, int v, double upstream);

// ---- model files --------------------------------------------------------------

void write_model(std::ostream& out, const EmbedParams& params);
EmbedParams read_model(std::istream& in);
void save_model(const std::string& path, const EmbedParams& params);
EmbedParams load_model(const std::string& path);

// FNV-1a over the serialized model bytes, as 16 hex digits.
std::string model_hash(const EmbedParams& params);

struct ModelInfo {
  ProblemKind problem = ProblemKind::mvc;
  std::string config_hash;
  int max_nodes = 0;
};
void save_model_info(const std::string& path, const ModelInfo& info, const EmbedParams& params);
ModelInfo load_model_info(const std::string& path);

}  // namespace gcomb
