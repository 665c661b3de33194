#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "gcomb/embedding.hpp"
#include "gcomb/graph.hpp"
#include "gcomb/problems.hpp"
#include "gcomb/rng.hpp"

namespace gcomb {

struct TrainConfig {
  ProblemKind kind = ProblemKind::mvc;
  int episodes = 1000;
  int n_step = 5;
  int batch_size = 128;
  std::size_t capacity = 50000;
  double lr0 = 1e-3;
  double lr_decay_factor = 0.95;
  int lr_decay_steps = 1000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  // Fraction of the episodes over which epsilon is annealed.
  double eps_anneal_fraction = 1.0;
  double gamma = 1.0;
  // Learner rewards are raw rewards times reward_sign, divided by reward_norm
  // (and, for TSP, by the instance coordinate scale). 0 means unset.
  double reward_norm = 0.0;
  double reward_sign = 1.0;
  int target_sync_interval = 500;
  double momentum = 0.0;
  // sgd (the default, with optional momentum) or adam
  enum class Optimizer { sgd, adam } optimizer = Optimizer::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  // Rescale the batch gradient to this L2 norm when it is larger; 0 disables.
  double grad_clip = 0.0;
  // Multiplies the uniform initial parameters; 1 keeps the [-1/sqrt(p), 1/sqrt(p)] range.
  double init_scale = 1.0;
  int p = 64;
  int T = 5;
  bool extra_layer = false;
  // MVC and SCP: mark covered edges in a second edge feature column.
  bool covered_edges = false;
  int validation_interval = 100;
  int checkpoint_interval = 0;
  std::uint64_t seed = 1;

  static TrainConfig defaults(ProblemKind kind);
  void validate() const;
};

double epsilon_at(long step, long total_steps, const TrainConfig& cfg);
double lr_at(long step, const TrainConfig& cfg);
double learner_reward(double raw, const WeightedGraph& g, const TrainConfig& cfg);

struct ReplayTuple {
  GraphPtr graph;
  EpisodeState state;
  int action = -1;
  double n_step_return = 0.0;
  EpisodeState next;
  bool terminal = false;

  // max Q~(next, .) under the target parameters of sync epoch target_epoch
  mutable double target_max = 0.0;
  mutable std::uint64_t target_epoch = std::numeric_limits<std::uint64_t>::max();
};

class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(ReplayTuple t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t pushed() const { return pushed_; }
  const ReplayTuple& at(std::size_t i) const { return items_[i]; }
  // i.i.d. uniform draws with replacement
  std::vector<const ReplayTuple*> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t pushed_ = 0;
  std::vector<ReplayTuple> items_;
};

// Greedy choice among candidates: largest Q, lowest node id on ties.
int argmax_candidate(const std::vector<double>& q, const std::vector<int>& cands);

// Q(state, .) for every node.
std::vector<double> q_for_state(const WeightedGraph& g, const EpisodeState& state, const EmbedParams& params);

// y = R for terminal tuples, otherwise R + gamma * max over candidates of Q~(next).
// A non-terminal tuple whose next state has no candidates is treated as terminal.
// When sync_epoch is given the bootstrap value is cached on the tuple.
double td_target(const ReplayTuple& t, const EmbedParams& target_params, const TrainConfig& cfg,
                 std::optional<std::uint64_t> sync_epoch = std::nullopt);

struct LossGradient {
  double loss = 0.0;
  EmbedParams grad;
};

// Mean squared TD error over the batch for fixed targets, and its gradient.
LossGradient loss_and_gradient(const EmbedParams& params, const std::vector<const ReplayTuple*>& batch,
                               const std::vector<double>& targets);

struct SgdState {
  EmbedParams velocity;  // momentum buffer, or Adam's first moment
  EmbedParams second;    // Adam's second moment
  long steps = 0;
};

// One step on the batch; returns the mean loss before the step.
double sgd_step(EmbedParams& params, const std::vector<const ReplayTuple*>& batch, const EmbedParams& target_params,
                double lr, const TrainConfig& cfg, SgdState* state = nullptr,
                std::optional<std::uint64_t> sync_epoch = std::nullopt);

struct TrainLogRow {
  int episode = 0;
  long step = 0;
  double epsilon = 0.0;
  double lr = 0.0;
  double loss = std::numeric_limits<double>::quiet_NaN();  // mean over the episode's updates
  double validation_ratio = std::numeric_limits<double>::quiet_NaN();
  double best_validation_ratio = std::numeric_limits<double>::quiet_NaN();
  double episode_value = 0.0;  // raw signed objective of the episode's final state
};

// Instance sampler: episode index -> graph. Must be deterministic in the index.
using Sampler = std::function<GraphPtr(int episode)>;

struct TrainHooks {
  // Mean validation ratio (lower is better); called every validation_interval episodes.
  std::function<double(const EmbedParams&)> validate;
  std::function<void(int episode, const EmbedParams&)> checkpoint;
  // Called with every finished episode's final state.
  std::function<void(int episode, const WeightedGraph&, const EpisodeState&)> on_episode;
};

struct TrainResult {
  EmbedParams params;       // final
  EmbedParams best_params;  // best by validation ratio, final when never validated
  double best_validation_ratio = std::numeric_limits<double>::quiet_NaN();
  std::vector<TrainLogRow> log;
  long env_steps = 0;
  long updates = 0;
  std::size_t tuples_pushed = 0;
};

TrainResult train(const Sampler& sampler, const TrainConfig& cfg, const std::optional<EmbedParams>& init = std::nullopt,
                  const TrainHooks& hooks = {});

EpisodeState greedy_rollout(const WeightedGraph& g, ProblemKind kind, const EmbedParams& params);

struct ActiveSearchResult {
  EpisodeState best;
  double best_value = -std::numeric_limits<double>::infinity();  // raw signed objective
  std::vector<double> best_so_far;                                // per episode
  EmbedParams params;
};

ActiveSearchResult active_search(const GraphPtr& g, const TrainConfig& cfg,
                                 const std::optional<EmbedParams>& init = std::nullopt);

}  // namespace gcomb
