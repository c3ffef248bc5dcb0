#include "rlvr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlvr/rng.hpp"

namespace rlvr {

OptimizerState OptimizerState::init(const PolicyParams& params,
                                    AdamConfig cfg) {
  OptimizerState s;
  s.m = Matrix::Zero(params.logits.rows(), params.logits.cols());
  s.v = Matrix::Zero(params.logits.rows(), params.logits.cols());
  s.cfg = cfg;
  return s;
}

void adam_ascent_step(PolicyParams& params, const Matrix& grad,
                      OptimizerState& opt, double lr) {
  if (grad.rows() != params.logits.rows() ||
      grad.cols() != params.logits.cols()) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  ++opt.step_count;
  const AdamConfig& c = opt.cfg;
  opt.m = c.beta1 * opt.m + (1.0 - c.beta1) * grad;
  opt.v = c.beta2 * opt.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bias1 =
      1.0 - std::pow(c.beta1, static_cast<double>(opt.step_count));
  const double bias2 =
      1.0 - std::pow(c.beta2, static_cast<double>(opt.step_count));
  const Matrix update =
      ((opt.m / bias1).array() / ((opt.v / bias2).array().sqrt() + c.epsilon))
          .matrix();
  params.logits += lr * update - lr * c.weight_decay * params.logits;
  if (!params.logits.allFinite()) {
    throw NumericalError("parameters became non-finite after update");
  }
}

void TrainConfig::validate() const {
  objective.validate();
  if (prompts_per_batch < 1 || group_size < 2 || mini_batch < 1) {
    throw std::invalid_argument(
        "prompts_per_batch/mini_batch must be positive and group_size >= 2");
  }
  if (prompts_per_batch % mini_batch != 0) {
    throw std::invalid_argument("mini_batch must divide prompts_per_batch");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (warmup_steps < 0 || total_steps < 0) {
    throw std::invalid_argument("step counts must be non-negative");
  }
  if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw std::invalid_argument("top_p must lie in (0, 1]");
  }
  if (num_states < 1 || context_order < 0) {
    throw std::invalid_argument("invalid policy table shape");
  }
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (!(val_fraction >= 0.0) || val_fraction >= 1.0) {
    throw std::invalid_argument("val_fraction must lie in [0, 1)");
  }
  if (!(init_scale >= 0.0)) {
    throw std::invalid_argument("init_scale must be non-negative");
  }
  length_penalty().validate();
}

LengthPenaltyConfig TrainConfig::length_penalty() const {
  return LengthPenaltyConfig{max_len, l_buffer, penalty_scale};
}

double warmup_lr(const TrainConfig& cfg, int step) {
  if (step < cfg.warmup_steps) {
    return cfg.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(cfg.warmup_steps);
  }
  return cfg.learning_rate;
}

namespace {

// Distinct prompt indices when the pool allows it, otherwise uniform with
// replacement.
std::vector<std::size_t> pick_prompts(std::size_t pool, int count, Rng& rng) {
  std::vector<std::size_t> picks;
  picks.reserve(static_cast<std::size_t>(count));
  if (pool >= static_cast<std::size_t>(count)) {
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    for (int k = 0; k < count; ++k) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_below(static_cast<std::int64_t>(pool - k)));
      std::swap(idx[static_cast<std::size_t>(k)],
                idx[static_cast<std::size_t>(k) + j]);
      picks.push_back(idx[static_cast<std::size_t>(k)]);
    }
  } else {
    for (int k = 0; k < count; ++k) {
      picks.push_back(static_cast<std::size_t>(
          rng.uniform_below(static_cast<std::int64_t>(pool))));
    }
  }
  return picks;
}

constexpr std::uint64_t kPromptSelectLane = 0xffffffffull;

}  // namespace

RolloutOutput rollout_step(const PolicyParams& params,
                           std::span<const TaskInstance> dataset,
                           const TrainConfig& cfg, int step) {
  if (dataset.empty()) throw std::invalid_argument("dataset is empty");
  const PolicyParams old = snapshot(params);
  const LengthPenaltyConfig penalty = cfg.length_penalty();
  const FormatRule format = single_marker_format_rule(old.vocab_size);

  Rng select(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(step),
                         kPromptSelectLane));
  const std::vector<std::size_t> picks =
      pick_prompts(dataset.size(), cfg.prompts_per_batch, select);

  RolloutOutput out;
  double len_sum = 0.0;
  double acc_sum = 0.0;
  std::int64_t n_traj = 0;
  for (int pi = 0; pi < cfg.prompts_per_batch; ++pi) {
    const TaskInstance& inst = dataset[picks[static_cast<std::size_t>(pi)]];
    const AnswerRule verifier = task_answer_rule(inst);
    Group group;
    group.query = inst.query;
    for (int g = 0; g < cfg.group_size; ++g) {
      const std::uint64_t seed =
          derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(step),
                      static_cast<std::uint64_t>(pi),
                      static_cast<std::uint64_t>(g));
      SampleResult s = sample_response(old, inst.query, cfg.max_len,
                                       cfg.temperature, cfg.top_p, seed);
      Trajectory traj;
      traj.tokens = std::move(s.tokens);
      traj.states = std::move(s.states);
      traj.old_logprobs = s.logprobs;
      traj.new_logprobs = s.logprobs;  // identity ratios until first update
      traj.reward =
          total_reward(inst.query, traj.tokens, penalty, verifier, format);
      len_sum += traj.length();
      out.max_response_length = std::max(out.max_response_length,
                                         traj.length());
      acc_sum += traj.reward.accuracy;
      ++n_traj;
      group.trajectories.push_back(std::move(traj));
    }
    assign_group_advantages(group);
    out.groups.push_back(std::move(group));
  }
  out.mean_response_length = len_sum / static_cast<double>(n_traj);
  out.mean_accuracy_reward = acc_sum / static_cast<double>(n_traj);
  return out;
}

void recompute_new_logprobs(const PolicyParams& params, Group& group,
                            double temperature) {
  for (Trajectory& traj : group.trajectories) {
    for (int t = 0; t < traj.length(); ++t) {
      const auto i = static_cast<std::size_t>(t);
      traj.new_logprobs(t) =
          state_log_prob(params, traj.states[i], traj.tokens[i], temperature);
    }
  }
}

OptimizeOutput optimize_step(PolicyParams& params, std::vector<Group>& groups,
                             const TrainConfig& cfg, OptimizerState& opt,
                             double lr, int step, const TrainHooks& hooks) {
  const int n_mini = cfg.prompts_per_batch / cfg.mini_batch;
  if (static_cast<int>(groups.size()) != cfg.prompts_per_batch) {
    throw std::invalid_argument("rollout size does not match config");
  }
  OptimizeOutput out;
  for (int mb = 0; mb < n_mini; ++mb) {
    const auto begin = static_cast<std::size_t>(mb * cfg.mini_batch);
    const std::span<Group> chunk(groups.data() + begin,
                                 static_cast<std::size_t>(cfg.mini_batch));
    for (Group& g : chunk) recompute_new_logprobs(params, g, cfg.temperature);

    const std::span<const Group> cchunk(chunk.data(), chunk.size());
    const ObjectiveReport report = evaluate_objective(cchunk, cfg.objective);
    const Matrix grad =
        objective_gradient(cchunk, cfg.objective, params, cfg.temperature);
    if (!grad.allFinite()) {
      throw NumericalError("non-finite gradient at step " +
                           std::to_string(step) + ", mini-batch " +
                           std::to_string(mb));
    }
    if (hooks.on_minibatch) {
      MiniBatchEvent ev;
      ev.step = step;
      ev.mini_batch = mb;
      ev.groups = cchunk;
      ev.report = &report;
      ev.lr = lr;
      hooks.on_minibatch(ev);
    }
    adam_ascent_step(params, grad, opt, lr);

    out.objective_value += report.value;
    out.clipped_pos += report.clipped_pos;
    out.clipped_neg += report.clipped_neg;
    out.grad_norm += grad.norm();
  }
  out.objective_value /= n_mini;
  out.grad_norm /= n_mini;
  return out;
}

double evaluate_accuracy(const PolicyParams& params,
                         std::span<const TaskInstance> split, int max_len) {
  if (split.empty()) throw std::invalid_argument("empty evaluation split");
  double acc = 0.0;
  for (const TaskInstance& inst : split) {
    const TokenSeq response = greedy_response(params, inst.query, max_len);
    acc += free_length_verifier(inst, response) ? 1.0 : 0.0;
  }
  return acc / static_cast<double>(split.size());
}

PolicyParams initial_policy(const TrainConfig& cfg, int vocab_size) {
  PolicyParams p =
      PolicyParams::random(cfg.num_states, vocab_size, cfg.context_order,
                           derive_seed(cfg.rng_seed, 0, 0x1417ull),
                           cfg.init_scale);
  p.logits.col(eos_token(vocab_size)).array() += cfg.eos_bias;
  return p;
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (dataset.instances.empty()) {
    throw std::invalid_argument("dataset has no instances");
  }

  const auto n = dataset.instances.size();
  const auto n_val = std::min(
      n - 1, static_cast<std::size_t>(std::ceil(
                 static_cast<double>(n) * cfg.val_fraction)));
  const std::span<const TaskInstance> all(dataset.instances);
  const auto train_split = all.subspan(0, n - n_val);
  const auto val_split = all.subspan(n - n_val);

  TrainResult result;
  result.params = initial_policy(cfg, dataset.vocab_size);
  OptimizerState opt = OptimizerState::init(result.params, cfg.adam);

  for (int step = 0; step < cfg.total_steps; ++step) {
    const double lr = warmup_lr(cfg, step);
    RolloutOutput rollout = rollout_step(result.params, train_split, cfg, step);
    const OptimizeOutput update =
        optimize_step(result.params, rollout.groups, cfg, opt, lr, step, hooks);

    StepMetrics m;
    m.step = step;
    m.mean_response_length = rollout.mean_response_length;
    m.max_response_length = rollout.max_response_length;
    m.mean_accuracy_reward = rollout.mean_accuracy_reward;
    m.objective_value = update.objective_value;
    m.clipped_pos = update.clipped_pos;
    m.clipped_neg = update.clipped_neg;
    m.grad_norm = update.grad_norm;
    m.lr = lr;
    if (!val_split.empty() && (step + 1) % cfg.eval_every == 0) {
      m.val_accuracy = evaluate_accuracy(result.params, val_split, cfg.max_len);
    }
    result.history.push_back(m);
    if (hooks.on_step) hooks.on_step(m);
  }
  return result;
}

}  // namespace rlvr
