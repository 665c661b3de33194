#include "gcomb/learning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gcomb/errors.hpp"

namespace gcomb {

TrainConfig TrainConfig::defaults(ProblemKind kind) {
  TrainConfig c;
  c.kind = kind;
  c.T = default_iterations(kind);
  switch (kind) {
    case ProblemKind::mvc:
      c.n_step = 5;
      c.batch_size = 128;
      break;
    case ProblemKind::maxcut:
      c.n_step = 1;
      c.batch_size = 64;
      break;
    case ProblemKind::tsp:
      c.n_step = 1;
      c.batch_size = 64;
      c.gamma = 0.1;
      c.reward_sign = -1.0;
      break;
    case ProblemKind::scp:
      c.n_step = 2;
      c.batch_size = 64;
      break;
  }
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ArgumentError("train config: " + what); };
  if (episodes < 0) fail("episodes must be >= 0");
  if (n_step < 1) fail("n_step must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (capacity < 1) fail("capacity must be >= 1");
  if (!(lr0 >= 0.0)) fail("lr0 must be >= 0");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) fail("lr_decay_factor must be in (0, 1]");
  if (lr_decay_steps < 1) fail("lr_decay_steps must be >= 1");
  if (!(eps_start >= eps_end && eps_end >= 0.0 && eps_start <= 1.0)) fail("need 1 >= eps_start >= eps_end >= 0");
  if (!(eps_anneal_fraction > 0.0 && eps_anneal_fraction <= 1.0)) fail("eps_anneal_fraction must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (!(reward_norm > 0.0)) fail("reward_norm must be > 0");
  if (covered_edges && kind != ProblemKind::mvc && kind != ProblemKind::scp) fail("covered_edges applies to mvc and scp");
  if (reward_sign != 1.0 && reward_sign != -1.0) fail("reward_sign must be +1 or -1");
  if (target_sync_interval < 1) fail("target_sync_interval must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(init_scale > 0.0 && std::isfinite(init_scale))) fail("init_scale must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam betas must be in [0, 1)");
  if (!(grad_clip >= 0.0)) fail("grad_clip must be >= 0");
  if (p < 1 || T < 0) fail("need p >= 1 and T >= 0");
  if (validation_interval < 0 || checkpoint_interval < 0) fail("intervals must be >= 0");
}

double epsilon_at(long step, long total_steps, const TrainConfig& cfg) {
  if (total_steps <= 0 || step >= total_steps) return cfg.eps_end;
  const double frac = static_cast<double>(std::max(0L, step)) / static_cast<double>(total_steps);
  return std::max(cfg.eps_end, cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac);
}

double lr_at(long step, const TrainConfig& cfg) {
  const long k = std::max(0L, step) / cfg.lr_decay_steps;
  return cfg.lr0 * std::pow(cfg.lr_decay_factor, static_cast<double>(k));
}

double learner_reward(double raw, const WeightedGraph& g, const TrainConfig& cfg) {
  double r = cfg.reward_sign * raw / cfg.reward_norm;
  if (cfg.kind == ProblemKind::tsp) r /= g.scale();
  return r;
}

// ---- replay -------------------------------------------------------------------------

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ArgumentError("replay capacity must be positive");
}

void ReplayMemory::push(ReplayTuple t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  ++pushed_;
}

std::vector<const ReplayTuple*> ReplayMemory::sample(std::size_t count, Rng& rng) const {
  std::vector<const ReplayTuple*> out;
  if (items_.empty()) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(&items_[rng.below(items_.size())]);
  return out;
}

// ---- Q evaluation -------------------------------------------------------------------

int argmax_candidate(const std::vector<double>& q, const std::vector<int>& cands) {
  int best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int v : cands) {
    const double x = q[static_cast<std::size_t>(v)];
    if (best < 0 || x > best_q) {
      best = v;
      best_q = x;
    }
  }
  return best;
}

std::vector<double> q_for_state(const WeightedGraph& g, const EpisodeState& state, const EmbedParams& params) {
  const Features f = node_features(state, g, params.d_edge);
  const EmbeddingResult r = embed(g, f, params, false);
  return q_values(r, params);
}

double td_target(const ReplayTuple& t, const EmbedParams& target_params, const TrainConfig& cfg,
                 std::optional<std::uint64_t> sync_epoch) {
  if (t.terminal || cfg.gamma == 0.0) return t.n_step_return;
  if (sync_epoch && t.target_epoch == *sync_epoch) return t.n_step_return + cfg.gamma * t.target_max;
  const auto cands = candidates(*t.graph, t.next);
  if (cands.empty()) return t.n_step_return;
  const auto q = q_for_state(*t.graph, t.next, target_params);
  const double m = q[static_cast<std::size_t>(argmax_candidate(q, cands))];
  if (sync_epoch) {
    t.target_max = m;
    t.target_epoch = *sync_epoch;
  }
  return t.n_step_return + cfg.gamma * m;
}

LossGradient loss_and_gradient(const EmbedParams& params, const std::vector<const ReplayTuple*>& batch,
                               const std::vector<double>& targets) {
  if (batch.empty()) throw ArgumentError("empty batch");
  if (targets.size() != batch.size()) throw ArgumentError("batch and target sizes differ");
  LossGradient out;
  out.grad = params.zeros_like();
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ReplayTuple& t = *batch[i];
    const Features f = node_features(t.state, *t.graph, params.d_edge);
    const EmbeddingResult r = embed(*t.graph, f, params, true);
    const double q = q_values(r, params)[static_cast<std::size_t>(t.action)];
    const double diff = q - targets[i];
    out.loss += diff * diff * inv;
    accumulate_gradient(*t.graph, f, params, r, t.action, 2.0 * diff * inv, out.grad);
  }
  return out;
}

namespace {

void adam_update(EmbedParams& params, const EmbedParams& grad, double lr, const TrainConfig& cfg, SgdState& st) {
  if (st.velocity.p == 0) {
    st.velocity = params.zeros_like();
    st.second = params.zeros_like();
  }
  ++st.steps;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.steps));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.steps));
  auto w = params.tensors();
  auto g = grad.tensors();
  auto m = st.velocity.tensors();
  auto v = st.second.tensors();
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t i = 0; i < w[k]->size(); ++i) {
      const double gi = g[k]->data[i];
      double& mi = m[k]->data[i];
      double& vi = v[k]->data[i];
      mi = b1 * mi + (1.0 - b1) * gi;
      vi = b2 * vi + (1.0 - b2) * gi * gi;
      w[k]->data[i] -= lr * (mi / c1) / (std::sqrt(vi / c2) + 1e-8);
    }
  }
}

}  // namespace

double sgd_step(EmbedParams& params, const std::vector<const ReplayTuple*>& batch, const EmbedParams& target_params,
                double lr, const TrainConfig& cfg, SgdState* state, std::optional<std::uint64_t> sync_epoch) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const ReplayTuple* t : batch) targets.push_back(td_target(*t, target_params, cfg, sync_epoch));
  LossGradient lg = loss_and_gradient(params, batch, targets);
  if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite loss or gradient (loss " << lg.loss << ", |theta|^2 " << params.squared_norm()
        << ", lr " << lr << ", batch " << batch.size() << ")";
    throw TrainingError(msg.str());
  }
  if (cfg.grad_clip > 0.0) {
    const double norm = std::sqrt(lg.grad.squared_norm());
    if (norm > cfg.grad_clip) lg.grad.scale(cfg.grad_clip / norm);
  }
  if (cfg.optimizer == TrainConfig::Optimizer::adam) {
    if (state == nullptr) throw ArgumentError("adam needs optimizer state");
    adam_update(params, lg.grad, lr, cfg, *state);
  } else if (cfg.momentum > 0.0 && state != nullptr) {
    if (state->velocity.p == 0) state->velocity = params.zeros_like();
    state->velocity.scale(cfg.momentum);
    state->velocity.axpy(1.0, lg.grad);
    params.axpy(-lr, state->velocity);
  } else {
    params.axpy(-lr, lg.grad);
  }
  if (!params.all_finite()) throw TrainingError("parameters became non-finite after an update");
  return lg.loss;
}

// ---- training loop ------------------------------------------------------------------

namespace {

struct Episode {
  std::vector<EpisodeState> states;  // states[t] before action t; states.back() final
  std::vector<int> actions;
  std::vector<double> rewards;  // learner rewards
};

ReplayTuple make_replay(const GraphPtr& g, const Episode& ep, std::size_t from, std::size_t to, bool terminal) {
  ReplayTuple t;
  t.graph = g;
  t.state = ep.states[from];
  t.action = ep.actions[from];
  double ret = 0.0;
  for (std::size_t i = from; i < to; ++i) ret += ep.rewards[i];
  t.n_step_return = ret;
  t.next = ep.states[to];
  t.terminal = terminal;
  return t;
}

EmbedParams initial_params(const TrainConfig& cfg, const std::optional<EmbedParams>& init) {
  const FeatureDims dims = feature_dims(cfg.kind, cfg.covered_edges);
  if (init) {
    if (init->d_node != dims.d_node || init->d_edge != dims.d_edge) {
      throw ArgumentError("initial model does not match the feature layout of " + std::string(to_string(cfg.kind)));
    }
    return *init;
  }
  EmbedParams params =
      init_params(cfg.p, dims.d_node, dims.d_edge, cfg.T, Rng(cfg.seed).split(0).seed(), cfg.extra_layer);
  if (cfg.init_scale != 1.0) params.scale(cfg.init_scale);
  return params;
}

}  // namespace

TrainResult train(const Sampler& sampler, const TrainConfig& cfg, const std::optional<EmbedParams>& init,
                  const TrainHooks& hooks) {
  cfg.validate();
  TrainResult res;
  res.params = initial_params(cfg, init);
  EmbedParams target = res.params;
  ReplayMemory memory(cfg.capacity);
  Rng explore = Rng(cfg.seed).split(1);
  Rng replay = Rng(cfg.seed).split(2);
  SgdState sgd;
  std::uint64_t sync_epoch = 0;
  const long anneal = std::max(1L, std::lround(cfg.eps_anneal_fraction * cfg.episodes));
  const auto n = static_cast<std::size_t>(cfg.n_step);
  double best_val = std::numeric_limits<double>::infinity();
  res.best_params = res.params;

  for (int e = 0; e < cfg.episodes; ++e) {
    GraphPtr g;
    try {
      g = sampler(e);
    } catch (const std::exception& ex) {
      throw TrainingError(std::string("instance sampler failed: ") + ex.what());
    }
    if (!g) throw TrainingError("instance sampler returned no graph");
    const double eps = epsilon_at(e, anneal, cfg);
    Episode ep;
    ep.states.push_back(init_state(*g, cfg.kind));
    double loss_sum = 0.0;
    int loss_count = 0;
    while (!terminated(*g, ep.states.back())) {
      const EpisodeState& cur = ep.states.back();
      const auto cands = candidates(*g, cur);
      if (cands.empty()) break;
      int v;
      if (explore.uniform() < eps) {
        v = cands[explore.below(cands.size())];
      } else {
        v = argmax_candidate(q_for_state(*g, cur, res.params), cands);
      }
      EpisodeState next = cur;
      const double raw = apply_inplace(*g, next, v);
      ep.actions.push_back(v);
      ep.rewards.push_back(learner_reward(raw, *g, cfg));
      ep.states.push_back(std::move(next));
      ++res.env_steps;
      const std::size_t t = ep.actions.size();
      if (t >= n) {
        memory.push(make_replay(g, ep, t - n, t, terminated(*g, ep.states.back())));
        const auto batch = memory.sample(static_cast<std::size_t>(cfg.batch_size), replay);
        loss_sum += sgd_step(res.params, batch, target, lr_at(res.updates, cfg), cfg, &sgd, sync_epoch);
        ++loss_count;
        ++res.updates;
        if (res.updates % cfg.target_sync_interval == 0) {
          target = res.params;
          ++sync_epoch;
        }
      }
    }
    // Flush the last steps with truncated returns.
    const std::size_t len = ep.actions.size();
    for (std::size_t from = len >= n ? len - n + 1 : 0; from < len; ++from) {
      memory.push(make_replay(g, ep, from, len, true));
    }

    TrainLogRow row;
    row.episode = e;
    row.step = res.env_steps;
    row.epsilon = eps;
    row.lr = lr_at(res.updates, cfg);
    if (loss_count > 0) row.loss = loss_sum / loss_count;
    const EpisodeState& final_state = ep.states.back();
    row.episode_value = recompute_cost(*g, final_state);
    if (hooks.on_episode) hooks.on_episode(e, *g, final_state);
    const bool last = e + 1 == cfg.episodes;
    if (hooks.validate && cfg.validation_interval > 0 && ((e + 1) % cfg.validation_interval == 0 || last)) {
      row.validation_ratio = hooks.validate(res.params);
      if (row.validation_ratio < best_val) {
        best_val = row.validation_ratio;
        res.best_params = res.params;
        res.best_validation_ratio = best_val;
      }
    }
    if (std::isfinite(best_val)) row.best_validation_ratio = best_val;
    res.log.push_back(row);
    if (hooks.checkpoint && cfg.checkpoint_interval > 0 && (e + 1) % cfg.checkpoint_interval == 0) {
      hooks.checkpoint(e, res.params);
    }
  }
  if (!std::isfinite(best_val)) res.best_params = res.params;
  res.tuples_pushed = memory.pushed();
  return res;
}

EpisodeState greedy_rollout(const WeightedGraph& g, ProblemKind kind, const EmbedParams& params) {
  EpisodeState s = init_state(g, kind);
  while (!terminated(g, s)) {
    const auto cands = candidates(g, s);
    if (cands.empty()) break;
    apply_inplace(g, s, argmax_candidate(q_for_state(g, s, params), cands));
  }
  return s;
}

ActiveSearchResult active_search(const GraphPtr& g, const TrainConfig& cfg, const std::optional<EmbedParams>& init) {
  if (!g) throw ArgumentError("active search needs an instance");
  ActiveSearchResult out;
  TrainHooks hooks;
  hooks.on_episode = [&](int, const WeightedGraph& graph, const EpisodeState& s) {
    if (terminated(graph, s)) {
      const double value = solution_value(graph, s);
      if (value > out.best_value) {
        out.best_value = value;
        out.best = s;
      }
    }
    out.best_so_far.push_back(out.best_value);
  };
  TrainResult r = train([g](int) { return g; }, cfg, init, hooks);
  out.params = std::move(r.params);
  return out;
}

}  // namespace gcomb
