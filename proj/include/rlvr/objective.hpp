#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rlvr/advantage.hpp"
#include "rlvr/policy.hpp"
#include "rlvr/types.hpp"

namespace rlvr {

enum class Algorithm { GRPO, GSPO, LUSPO };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Asymmetric clipping band [1 - eps_low, 1 + eps_high]. Sequence-level
// ratios concentrate near 1, so GSPO/LUSPO default to a much tighter band
// than GRPO's token-level one.
struct ObjectiveConfig {
  Algorithm algorithm = Algorithm::GSPO;
  double eps_low = 2e-3;
  double eps_high = 2.5e-3;

  void validate() const;
  static ObjectiveConfig defaults(Algorithm a);
};

// Surrogate value of a batch plus clip accounting. Items are tokens under
// GRPO and whole trajectories under GSPO/LUSPO; clip_mask rows follow the
// same granularity (per-token for GRPO, a single flag otherwise).
struct ObjectiveReport {
  double value = 0.0;
  std::vector<double> per_trajectory_values;  // group-major order
  std::vector<std::vector<bool>> clip_mask;
  std::int64_t clipped_pos = 0;  // clipped items with positive advantage
  std::int64_t clipped_neg = 0;  // clipped items with negative advantage
};

/// Token importance ratio exp(new_logprob[t] - old_logprob[t]).
double token_ratio(const Trajectory& traj, int t);

/// Sequence importance ratio exp(mean_t(new - old)), formed in log space.
double sequence_ratio(const Trajectory& traj);

struct ClipResult {
  double term = 0.0;
  bool clipped = false;
};

// min(ratio * A, clip(ratio, 1 - eps_low, 1 + eps_high) * A). `clipped` is
// set exactly when the clipped branch is strictly smaller, i.e. when the
// item sits on the flat part of the min and contributes zero gradient.
ClipResult clip_ratio(double ratio, double advantage,
                      const ObjectiveConfig& cfg);

// Batch objectives: the mean over groups of the per-group mean over the G
// trajectories of
//   GRPO:   (1/|y_i|) sum_t min(w_{i,t} A_i, clip(w_{i,t}) A_i)
//   GSPO:   min(s_i A_i, clip(s_i) A_i)
//   LUSPO:  min(s_i A_i, clip(s_i) A_i) * |y_i|
ObjectiveReport grpo_objective(std::span<const Group> groups,
                               const ObjectiveConfig& cfg);
ObjectiveReport gspo_objective(std::span<const Group> groups,
                               const ObjectiveConfig& cfg);
ObjectiveReport luspo_objective(std::span<const Group> groups,
                                const ObjectiveConfig& cfg);

/// Dispatches on cfg.algorithm.
ObjectiveReport evaluate_objective(std::span<const Group> groups,
                                   const ObjectiveConfig& cfg);

// Scalar multiplying grad log pi(y_t) in the surrogate gradient, zero for
// clipped items:
//   GRPO:   w_{i,t} * A_i / |y_i|
//   GSPO:   s_i * A_i / |y_i|
//   LUSPO:  s_i * A_i
// This is the quantity whose 1/|y_i| attenuation under GRPO/GSPO (and
// absence under LUSPO) constitutes the objectives' length preference.
std::vector<double> per_token_coefficients(const Trajectory& traj,
                                           const ObjectiveConfig& cfg);

// Gradient contribution of a single trajectory w.r.t. the logit table,
// before the outer 1/(G * num_groups) scaling. For GSPO/LUSPO this is a
// scalar times sum_t grad log pi(y_t), so the two algorithms' per-trajectory
// gradients differ element-wise by exactly the factor |y_i|.
Matrix trajectory_gradient(const PolicyParams& params, const Trajectory& traj,
                           const ObjectiveConfig& cfg,
                           double temperature = 1.0);

// Exact gradient of the clipped batch surrogate w.r.t. the logit table.
// `temperature` must match the one used to produce the trajectories'
// log-probs. new_logprobs are assumed recomputed under `params`.
Matrix objective_gradient(std::span<const Group> groups,
                          const ObjectiveConfig& cfg,
                          const PolicyParams& params, double temperature = 1.0);

}  // namespace rlvr
