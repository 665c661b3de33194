#include "gcomb/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcomb/errors.hpp"
#include "gcomb/rng.hpp"

namespace gcomb {

// ---- EmbedParams ----------------------------------------------------------------

EmbedParams EmbedParams::zeros(int p, int T, int d_node, int d_edge, bool extra_layer) {
  if (p < 1 || T < 0 || d_node < 1 || d_edge < 1) throw ArgumentError("invalid embedding shape");
  EmbedParams e;
  e.p = p;
  e.T = T;
  e.d_node = d_node;
  e.d_edge = d_edge;
  e.extra_layer = extra_layer;
  e.theta1 = Matrix(p, d_node);
  e.theta2 = Matrix(p, p);
  e.theta3 = Matrix(p, p);
  e.theta4 = Matrix(p, d_edge);
  e.theta5 = Matrix(1, 2 * p);
  e.theta6 = Matrix(p, p);
  e.theta7 = Matrix(p, p);
  if (extra_layer) e.extra = Matrix(p, p);
  return e;
}

std::vector<Matrix*> EmbedParams::tensors() {
  std::vector<Matrix*> out{&theta1, &theta2, &theta3, &theta4, &theta5, &theta6, &theta7};
  if (extra_layer) out.push_back(&extra);
  return out;
}

std::vector<const Matrix*> EmbedParams::tensors() const {
  std::vector<const Matrix*> out{&theta1, &theta2, &theta3, &theta4, &theta5, &theta6, &theta7};
  if (extra_layer) out.push_back(&extra);
  return out;
}

std::size_t EmbedParams::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : tensors()) n += m->size();
  return n;
}

void EmbedParams::axpy(double alpha, const EmbedParams& other) {
  auto mine = tensors();
  auto theirs = other.tensors();
  if (mine.size() != theirs.size()) throw ArgumentError("parameter layout mismatch");
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (mine[k]->size() != theirs[k]->size()) throw ArgumentError("parameter shape mismatch");
    double* a = mine[k]->data.data();
    const double* b = theirs[k]->data.data();
    for (std::size_t i = 0; i < mine[k]->size(); ++i) a[i] += alpha * b[i];
  }
}

void EmbedParams::scale(double alpha) {
  for (Matrix* m : tensors()) {
    for (double& x : m->data) x *= alpha;
  }
}

void EmbedParams::set_zero() {
  for (Matrix* m : tensors()) std::fill(m->data.begin(), m->data.end(), 0.0);
}

bool EmbedParams::all_finite() const {
  for (const Matrix* m : tensors()) {
    for (double x : m->data) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double EmbedParams::squared_norm() const {
  double s = 0.0;
  for (const Matrix* m : tensors()) {
    for (double x : m->data) s += x * x;
  }
  return s;
}

EmbedParams init_params(int p, int d_node, int d_edge, int T, std::uint64_t seed, bool extra_layer) {
  EmbedParams e = EmbedParams::zeros(p, T, d_node, d_edge, extra_layer);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(p));
  for (Matrix* m : e.tensors()) {
    for (double& x : m->data) x = rng.uniform(-bound, bound);
  }
  return e;
}

FeatureDims feature_dims(ProblemKind kind, bool covered_edges) {
  switch (kind) {
    case ProblemKind::mvc:
    case ProblemKind::scp:
      return {1, covered_edges ? 2 : 1};
    case ProblemKind::maxcut:
      return {1, 2};
    case ProblemKind::tsp:
      return {5, 2};
  }
  return {1, 1};
}

int default_iterations(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::mvc: return 5;
    case ProblemKind::maxcut: return 3;
    case ProblemKind::tsp: return 4;
    case ProblemKind::scp: return 5;
  }
  return 4;
}

// ---- features --------------------------------------------------------------------

Features node_features(const EpisodeState& state, const WeightedGraph& g, int d_edge) {
  FeatureDims dims = feature_dims(state.kind);
  if (d_edge != 0 && d_edge != dims.d_edge) {
    dims = feature_dims(state.kind, true);
    if (d_edge != dims.d_edge) {
      throw ArgumentError("no " + std::to_string(d_edge) + "-column edge layout for " + std::string(to_string(state.kind)));
    }
  }
  const bool covered_edges = dims.d_edge == 2 && (state.kind == ProblemKind::mvc || state.kind == ProblemKind::scp);
  const int n = g.node_count();
  Features f;
  f.d_node = dims.d_node;
  f.d_edge = dims.d_edge;
  f.node.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(dims.d_node), 0.0);
  f.offset.resize(static_cast<std::size_t>(n) + 1);
  std::size_t directed = 0;
  for (int v = 0; v < n; ++v) {
    f.offset[static_cast<std::size_t>(v)] = directed;
    directed += static_cast<std::size_t>(g.degree(v));
  }
  f.offset[static_cast<std::size_t>(n)] = directed;
  f.edge.assign(directed * static_cast<std::size_t>(dims.d_edge), 0.0);

  const int first = state.tour.empty() ? -1 : state.tour.front();
  const int last = state.tour.empty() ? -1 : state.tour.back();
  const double scale = g.scale();
  const PointSet* ps = g.points();
  for (int v = 0; v < n; ++v) {
    double* x = f.node.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(dims.d_node);
    const double tag = state.contains(v) ? 1.0 : 0.0;
    if (state.kind == ProblemKind::tsp) {
      x[0] = ps ? ps->points[static_cast<std::size_t>(v)].x / scale : 0.0;
      x[1] = ps ? ps->points[static_cast<std::size_t>(v)].y / scale : 0.0;
      x[2] = tag;
      x[3] = v == first ? 1.0 : 0.0;
      x[4] = v == last ? 1.0 : 0.0;
    } else {
      x[0] = tag;
    }
    std::size_t idx = f.offset[static_cast<std::size_t>(v)];
    for (const auto& nb : g.neighbors(v)) {
      double* e = f.edge.data() + idx * static_cast<std::size_t>(dims.d_edge);
      switch (state.kind) {
        case ProblemKind::mvc:
          e[0] = nb.weight;
          if (covered_edges) e[1] = tag > 0.0 || state.contains(nb.id) ? 1.0 : 0.0;
          break;
        case ProblemKind::scp:
          e[0] = nb.weight;
          if (covered_edges) e[1] = state.hits[static_cast<std::size_t>(v < g.cover_count() ? nb.id : v)] > 0 ? 1.0 : 0.0;
          break;
        case ProblemKind::maxcut:
          e[0] = nb.weight;
          e[1] = state.contains(nb.id) ? 1.0 : 0.0;
          break;
        case ProblemKind::tsp:
          e[0] = nb.weight / scale;
          e[1] = state.contains(nb.id) ? 1.0 : 0.0;
          break;
      }
      ++idx;
    }
  }
  return f;
}

// ---- forward ----------------------------------------------------------------------

namespace {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

// Row-major transpose of a rows x cols matrix into cols x rows.
std::vector<double> transpose(const Matrix& m) {
  std::vector<double> t(m.size());
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      t[static_cast<std::size_t>(c) * static_cast<std::size_t>(m.rows) + static_cast<std::size_t>(r)] = m(r, c);
    }
  }
  return t;
}

// y[0..p) += W x for W given transposed (wt is k x p). Each y[i] accumulates over j in
// ascending order, so identical inputs give identical bits whatever the row position.
inline void matvec_t_add(const double* wt, const double* x, int k, int p, double* y) {
  for (int j = 0; j < k; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* w = wt + static_cast<std::size_t>(j) * static_cast<std::size_t>(p);
    for (int i = 0; i < p; ++i) y[i] += xj * w[i];
  }
}

// y[0..k) += W^T g for row-major W (p x k).
inline void matvec_transposed_add(const Matrix& w, const double* g, double* y) {
  for (int i = 0; i < w.rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    const double* row = w.data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(w.cols);
    for (int j = 0; j < w.cols; ++j) y[j] += gi * row[j];
  }
}

// G += g x^T for G (p x k).
inline void outer_add(const double* g, const double* x, Matrix& grad) {
  for (int i = 0; i < grad.rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    double* row = grad.data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(grad.cols);
    for (int j = 0; j < grad.cols; ++j) row[j] += gi * x[j];
  }
}

// Sum of p-vectors in a canonical order: rows are sorted lexicographically by value
// before accumulation. The result depends only on the multiset of rows, so it is
// the same for any neighbour storage order or node labelling.
void canonical_sum(std::vector<const double*>& rows, int p, double* out) {
  std::fill(out, out + p, 0.0);
  if (rows.empty()) return;
  if (rows.size() > 1) {
    std::sort(rows.begin(), rows.end(), [p](const double* a, const double* b) {
      return std::lexicographical_compare(a, a + p, b, b + p);
    });
  }
  for (const double* r : rows) {
    for (int i = 0; i < p; ++i) out[i] += r[i];
  }
}

}  // namespace

EmbeddingResult embed(const WeightedGraph& g, const Features& f, const EmbedParams& params, bool retain) {
  const int n = g.node_count();
  const int p = params.p;
  if (f.d_node != params.d_node || f.d_edge != params.d_edge) {
    throw ArgumentError("feature dimensions (" + std::to_string(f.d_node) + ", " + std::to_string(f.d_edge) +
                        ") do not match parameters (" + std::to_string(params.d_node) + ", " +
                        std::to_string(params.d_edge) + ")");
  }
  if (f.offset.size() != static_cast<std::size_t>(n) + 1) throw ArgumentError("features built for another graph");
  const auto P = static_cast<std::size_t>(p);
  const auto N = static_cast<std::size_t>(n);

  EmbeddingResult r;
  r.n = n;
  r.p = p;
  r.T = params.T;
  r.retained = retain;
  r.mu.assign(N * P, 0.0);
  r.pooled.assign(P, 0.0);

  std::vector<const double*> rows;

  // Edge term: constant across sweeps.
  const std::size_t directed = f.offset[N];
  const auto t4 = transpose(params.theta4);
  std::vector<double> edge_pre(directed * P, 0.0);
  std::vector<double> edge_act(directed * P, 0.0);
  for (std::size_t idx = 0; idx < directed; ++idx) {
    double* q = edge_pre.data() + idx * P;
    matvec_t_add(t4.data(), f.edge_row(idx), f.d_edge, p, q);
    double* a = edge_act.data() + idx * P;
    for (int i = 0; i < p; ++i) a[i] = relu(q[i]);
  }
  std::vector<double> edge_sum(N * P, 0.0);
  for (int v = 0; v < n; ++v) {
    rows.clear();
    for (std::size_t idx = f.offset[static_cast<std::size_t>(v)]; idx < f.offset[static_cast<std::size_t>(v) + 1]; ++idx) {
      rows.push_back(edge_act.data() + idx * P);
    }
    canonical_sum(rows, p, edge_sum.data() + static_cast<std::size_t>(v) * P);
  }

  // base_v = theta1 x_v + theta3 E_v
  const auto t1 = transpose(params.theta1);
  const auto t3 = transpose(params.theta3);
  std::vector<double> base(N * P, 0.0);
  for (int v = 0; v < n; ++v) {
    double* b = base.data() + static_cast<std::size_t>(v) * P;
    matvec_t_add(t1.data(), f.node_row(v), f.d_node, p, b);
    matvec_t_add(t3.data(), edge_sum.data() + static_cast<std::size_t>(v) * P, p, p, b);
  }

  const auto t2 = transpose(params.theta2);
  const std::vector<double> tx = params.extra_layer ? transpose(params.extra) : std::vector<double>{};
  std::vector<double> nbr(N * P, 0.0);
  std::vector<double> hidden(N * P, 0.0);
  std::vector<double> xpre(params.extra_layer ? N * P : 0, 0.0);
  std::vector<double> pre(N * P, 0.0);
  for (int t = 0; t < params.T; ++t) {
    // Neighbour sums of mu^(t); mu^(0) = 0.
    if (t == 0) {
      std::fill(nbr.begin(), nbr.end(), 0.0);
    } else {
      for (int v = 0; v < n; ++v) {
        rows.clear();
        for (const auto& nb : g.neighbors(v)) rows.push_back(r.mu.data() + static_cast<std::size_t>(nb.id) * P);
        canonical_sum(rows, p, nbr.data() + static_cast<std::size_t>(v) * P);
      }
    }
    const double* agg = nbr.data();
    if (params.extra_layer) {
      std::fill(xpre.begin(), xpre.end(), 0.0);
      for (int v = 0; v < n; ++v) {
        double* z = xpre.data() + static_cast<std::size_t>(v) * P;
        matvec_t_add(tx.data(), nbr.data() + static_cast<std::size_t>(v) * P, p, p, z);
        double* h = hidden.data() + static_cast<std::size_t>(v) * P;
        for (int i = 0; i < p; ++i) h[i] = relu(z[i]);
      }
      agg = hidden.data();
    }
    pre = base;
    for (int v = 0; v < n; ++v) {
      matvec_t_add(t2.data(), agg + static_cast<std::size_t>(v) * P, p, p, pre.data() + static_cast<std::size_t>(v) * P);
    }
    for (std::size_t i = 0; i < N * P; ++i) r.mu[i] = relu(pre[i]);
    if (retain) {
      r.nbr.push_back(nbr);
      r.pre.push_back(pre);
      if (params.extra_layer) r.extra_pre.push_back(xpre);
    }
  }

  rows.clear();
  for (int v = 0; v < n; ++v) rows.push_back(r.mu.data() + static_cast<std::size_t>(v) * P);
  canonical_sum(rows, p, r.pooled.data());

  if (retain) {
    r.edge_pre = std::move(edge_pre);
    r.edge_sum = std::move(edge_sum);
  }
  return r;
}

std::vector<double> q_values(const EmbeddingResult& r, const EmbedParams& params) {
  const int p = params.p;
  const auto P = static_cast<std::size_t>(p);
  if (r.p != p) throw ArgumentError("embedding size mismatch");
  const auto t6 = transpose(params.theta6);
  const auto t7 = transpose(params.theta7);
  const double* w5 = params.theta5.data.data();

  std::vector<double> a(P, 0.0);
  matvec_t_add(t6.data(), r.pooled.data(), p, p, a.data());
  double graph_term = 0.0;
  for (int i = 0; i < p; ++i) graph_term += w5[i] * relu(a[static_cast<std::size_t>(i)]);

  std::vector<double> q(static_cast<std::size_t>(r.n), 0.0);
  std::vector<double> b(P);
  for (int v = 0; v < r.n; ++v) {
    std::fill(b.begin(), b.end(), 0.0);
    matvec_t_add(t7.data(), r.mu_row(v), p, p, b.data());
    double node_term = 0.0;
    for (int i = 0; i < p; ++i) node_term += w5[P + static_cast<std::size_t>(i)] * relu(b[static_cast<std::size_t>(i)]);
    q[static_cast<std::size_t>(v)] = graph_term + node_term;
  }
  return q;
}

// ---- backward --------------------------------------------------------------------

void accumulate_gradient(const WeightedGraph& g, const Features& f, const EmbedParams& params,
                         const EmbeddingResult& r, int v, double upstream, EmbedParams& grad) {
  if (!r.retained || static_cast<int>(r.pre.size()) != params.T) {
    throw ContractViolation("backward needs a forward pass with retained activations");
  }
  if (v < 0 || v >= r.n) throw ArgumentError("node out of range in backward");
  if (upstream == 0.0) return;
  const int n = r.n;
  const int p = params.p;
  const auto P = static_cast<std::size_t>(p);
  const auto N = static_cast<std::size_t>(n);

  // Q head: Q = theta5 . relu([theta6 pooled, theta7 mu_v])
  const auto t6 = transpose(params.theta6);
  const auto t7 = transpose(params.theta7);
  std::vector<double> a(P, 0.0);
  std::vector<double> b(P, 0.0);
  matvec_t_add(t6.data(), r.pooled.data(), p, p, a.data());
  matvec_t_add(t7.data(), r.mu_row(v), p, p, b.data());
  const double* w5 = params.theta5.data.data();
  double* g5 = grad.theta5.data.data();
  std::vector<double> ga(P, 0.0);
  std::vector<double> gb(P, 0.0);
  for (std::size_t i = 0; i < P; ++i) {
    g5[i] += upstream * relu(a[i]);
    g5[P + i] += upstream * relu(b[i]);
    ga[i] = a[i] > 0.0 ? upstream * w5[i] : 0.0;
    gb[i] = b[i] > 0.0 ? upstream * w5[P + i] : 0.0;
  }
  outer_add(ga.data(), r.pooled.data(), grad.theta6);
  outer_add(gb.data(), r.mu_row(v), grad.theta7);

  std::vector<double> g_pooled(P, 0.0);
  std::vector<double> g_muv(P, 0.0);
  matvec_transposed_add(params.theta6, ga.data(), g_pooled.data());
  matvec_transposed_add(params.theta7, gb.data(), g_muv.data());

  std::vector<double> g_mu(N * P);
  for (int u = 0; u < n; ++u) std::copy(g_pooled.begin(), g_pooled.end(), g_mu.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(u) * P));
  for (std::size_t i = 0; i < P; ++i) g_mu[static_cast<std::size_t>(v) * P + i] += g_muv[i];

  // Unrolled sweeps. The theta1/theta3 inputs are constant across sweeps, so their
  // pre-activation gradients are summed first and contracted once.
  std::vector<double> g_pre(N * P);
  std::vector<double> g_pre_total(N * P, 0.0);
  std::vector<double> g_agg(N * P);
  std::vector<double> g_nbr(N * P);
  std::vector<double> hidden(P);
  std::vector<double> g_hidden(P);
  for (int t = params.T - 1; t >= 0; --t) {
    const auto& pre = r.pre[static_cast<std::size_t>(t)];
    const auto& nbr = r.nbr[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < N * P; ++i) {
      g_pre[i] = pre[i] > 0.0 ? g_mu[i] : 0.0;
      g_pre_total[i] += g_pre[i];
    }
    std::fill(g_nbr.begin(), g_nbr.end(), 0.0);
    for (int u = 0; u < n; ++u) {
      const double* gp = g_pre.data() + static_cast<std::size_t>(u) * P;
      const double* nb = nbr.data() + static_cast<std::size_t>(u) * P;
      double* gn = g_nbr.data() + static_cast<std::size_t>(u) * P;
      if (params.extra_layer) {
        const double* z = r.extra_pre[static_cast<std::size_t>(t)].data() + static_cast<std::size_t>(u) * P;
        for (std::size_t i = 0; i < P; ++i) hidden[i] = relu(z[i]);
        outer_add(gp, hidden.data(), grad.theta2);
        std::fill(g_hidden.begin(), g_hidden.end(), 0.0);
        matvec_transposed_add(params.theta2, gp, g_hidden.data());
        for (std::size_t i = 0; i < P; ++i) g_hidden[i] = z[i] > 0.0 ? g_hidden[i] : 0.0;
        outer_add(g_hidden.data(), nb, grad.extra);
        matvec_transposed_add(params.extra, g_hidden.data(), gn);
      } else {
        outer_add(gp, nb, grad.theta2);
        matvec_transposed_add(params.theta2, gp, gn);
      }
    }
    if (t == 0) break;  // mu^(0) is the constant zero
    // g_mu^(t)[w] = sum over v with w in N(v) of g_nbr[v]; the graph is undirected.
    std::fill(g_mu.begin(), g_mu.end(), 0.0);
    for (int w = 0; w < n; ++w) {
      double* gm = g_mu.data() + static_cast<std::size_t>(w) * P;
      for (const auto& nb : g.neighbors(w)) {
        const double* gn = g_nbr.data() + static_cast<std::size_t>(nb.id) * P;
        for (std::size_t i = 0; i < P; ++i) gm[i] += gn[i];
      }
    }
  }

  std::vector<double> g_edge_sum(P);
  std::vector<double> g_q(P);
  for (int u = 0; u < n; ++u) {
    const double* gp = g_pre_total.data() + static_cast<std::size_t>(u) * P;
    outer_add(gp, f.node_row(u), grad.theta1);
    const double* es = r.edge_sum.data() + static_cast<std::size_t>(u) * P;
    outer_add(gp, es, grad.theta3);
    std::fill(g_edge_sum.begin(), g_edge_sum.end(), 0.0);
    matvec_transposed_add(params.theta3, gp, g_edge_sum.data());
    for (std::size_t idx = f.offset[static_cast<std::size_t>(u)]; idx < f.offset[static_cast<std::size_t>(u) + 1]; ++idx) {
      const double* q = r.edge_pre.data() + idx * P;
      for (std::size_t i = 0; i < P; ++i) g_q[i] = q[i] > 0.0 ? g_edge_sum[i] : 0.0;
      outer_add(g_q.data(), f.edge_row(idx), grad.theta4);
    }
  }
}

EmbedParams backward(const WeightedGraph& g, const Features& f, const EmbedParams& params,
                     const EmbeddingResult& r, int v, double upstream) {
  EmbedParams grad = params.zeros_like();
  accumulate_gradient(g, f, params, r, v, upstream, grad);
  return grad;
}

// ---- model files -----------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'C', 'O', 'M', 'B', 'S', '2', 'V'};
constexpr std::uint32_t kVersionPlain = 1;
constexpr std::uint32_t kVersionExtraLayer = 2;

void put_u32(std::ostream& out, std::uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError("truncated model file");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return x;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("truncated model file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(x);
}

}  // namespace

void write_model(std::ostream& out, const EmbedParams& params) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, params.extra_layer ? kVersionExtraLayer : kVersionPlain);
  put_u32(out, static_cast<std::uint32_t>(params.p));
  put_u32(out, static_cast<std::uint32_t>(params.T));
  put_u32(out, static_cast<std::uint32_t>(params.d_node));
  put_u32(out, static_cast<std::uint32_t>(params.d_edge));
  for (const Matrix* m : params.tensors()) {
    for (double x : m->data) put_f64(out, x);
  }
}

EmbedParams read_model(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ParseError("not a model file (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersionPlain && version != kVersionExtraLayer) {
    throw ParseError("unsupported model version " + std::to_string(version));
  }
  const auto p = static_cast<int>(get_u32(in));
  const auto T = static_cast<int>(get_u32(in));
  const auto d_node = static_cast<int>(get_u32(in));
  const auto d_edge = static_cast<int>(get_u32(in));
  if (p < 1 || p > 4096 || T > 64 || d_node < 1 || d_node > 64 || d_edge < 1 || d_edge > 64) {
    throw ParseError("implausible model header");
  }
  EmbedParams e = EmbedParams::zeros(p, T, d_node, d_edge, version == kVersionExtraLayer);
  for (Matrix* m : e.tensors()) {
    for (double& x : m->data) x = get_f64(in);
  }
  return e;
}

void save_model(const std::string& path, const EmbedParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_model(out, params);
  if (!out) throw IoError("write failed for " + path);
}

EmbedParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_model(in);
}

std::string model_hash(const EmbedParams& params) {
  std::ostringstream buf;
  write_model(buf, params);
  const std::string bytes = buf.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void save_model_info(const std::string& path, const ModelInfo& info, const EmbedParams& params) {
  nlohmann::json j;
  j["format"] = "gcomb-model";
  j["problem"] = std::string(to_string(info.problem));
  j["config_hash"] = info.config_hash;
  j["max_nodes"] = info.max_nodes;
  j["p"] = params.p;
  j["T"] = params.T;
  j["d_node"] = params.d_node;
  j["d_edge"] = params.d_edge;
  j["extra_layer"] = params.extra_layer;
  j["model_hash"] = model_hash(params);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ModelInfo load_model_info(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    ModelInfo info;
    info.problem = problem_kind_from_string(j.at("problem").get<std::string>());
    info.config_hash = j.value("config_hash", "");
    info.max_nodes = j.value("max_nodes", 0);
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace gcomb
