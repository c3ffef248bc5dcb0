#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rlvr/metrics.hpp"
#include "rlvr/objective.hpp"
#include "rlvr/tasks.hpp"
#include "rlvr/types.hpp"

namespace rlvr {

// Adaptive-moment ascent with decoupled weight decay.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

struct OptimizerState {
  Matrix m;  // first moment, shaped like the logit table
  Matrix v;  // second moment
  std::int64_t step_count = 0;
  AdamConfig cfg;

  static OptimizerState init(const PolicyParams& params, AdamConfig cfg = {});
};

/// One ascent update of `params` along `grad`.
void adam_ascent_step(PolicyParams& params, const Matrix& grad,
                      OptimizerState& opt, double lr);

struct TrainConfig {
  ObjectiveConfig objective = ObjectiveConfig::defaults(Algorithm::GSPO);
  int prompts_per_batch = 16;
  int group_size = 8;
  int mini_batch = 4;  // prompts per gradient update
  double learning_rate = 1e-2;
  int warmup_steps = 20;
  int max_len = 64;
  double temperature = 1.0;
  double top_p = 0.7;
  int total_steps = 200;
  std::uint64_t rng_seed = 0;

  // policy table. A non-zero init_scale keeps the initial nucleus from
  // excluding fixed token ids by tie-breaking, which would make the reserved
  // ids unreachable at top_p < 1. eos_bias shifts the end-of-sequence logit
  // at initialization; negative values lengthen initial responses.
  int num_states = 4096;
  int context_order = 1;
  double init_scale = 0.5;
  double eos_bias = 0.0;

  // reward; the generation cap doubles as l_max
  int l_buffer = 16;
  double penalty_scale = 0.3;

  AdamConfig adam;

  // held-out evaluation
  int eval_every = 10;
  double val_fraction = 0.2;

  void validate() const;
  LengthPenaltyConfig length_penalty() const;
};

/// lr * (step + 1) / warmup_steps during warm-up, lr afterwards.
double warmup_lr(const TrainConfig& cfg, int step);

struct RolloutOutput {
  std::vector<Group> groups;
  double mean_response_length = 0.0;
  int max_response_length = 0;
  double mean_accuracy_reward = 0.0;
};

// Samples group_size responses for prompts_per_batch queries under a
// snapshot of `params`, scores them, and standardizes advantages per group.
// Per-prompt sample seeds derive from (rng_seed, step, prompt index), so the
// rollout is reproducible independently of evaluation order.
RolloutOutput rollout_step(const PolicyParams& params,
                           std::span<const TaskInstance> dataset,
                           const TrainConfig& cfg, int step);

struct MiniBatchEvent {
  int step = 0;
  int mini_batch = 0;
  std::span<const Group> groups;  // new_logprobs current at evaluation time
  const ObjectiveReport* report = nullptr;
  double lr = 0.0;
};

struct TrainHooks {
  std::function<void(const StepMetrics&)> on_step;
  std::function<void(const MiniBatchEvent&)> on_minibatch;
};

struct OptimizeOutput {
  double objective_value = 0.0;  // mean across the step's mini-batches
  std::int64_t clipped_pos = 0;
  std::int64_t clipped_neg = 0;
  double grad_norm = 0.0;  // mean Frobenius norm across mini-batches
};

/// Recomputes each trajectory's new_logprobs under `params` at the given
/// temperature; old_logprobs stay untouched.
void recompute_new_logprobs(const PolicyParams& params, Group& group,
                            double temperature);

// One pass over the rollout in prompts_per_batch / mini_batch chunks: for
// each chunk, recompute new_logprobs under the current params, take one
// adaptive-moment ascent step on the configured objective. Aborts with
// NumericalError if a gradient is non-finite.
OptimizeOutput optimize_step(PolicyParams& params, std::vector<Group>& groups,
                             const TrainConfig& cfg, OptimizerState& opt,
                             double lr, int step, const TrainHooks& hooks = {});

struct TrainResult {
  PolicyParams params;
  std::vector<StepMetrics> history;
};

/// The policy table a run starts from, seeded from the run seed.
PolicyParams initial_policy(const TrainConfig& cfg, int vocab_size);

// Full loop: snapshot, rollout, optimize, repeat for total_steps. The last
// ceil(n * val_fraction) dataset records form a held-out split evaluated by
// greedy decoding every eval_every steps. Identical (dataset, config) runs
// produce identical histories.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

/// Mean accuracy of greedy decodes over a split.
double evaluate_accuracy(const PolicyParams& params,
                         std::span<const TaskInstance> split, int max_len);

}  // namespace rlvr
