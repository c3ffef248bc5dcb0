#pragma once

#include <span>
#include <vector>

#include "rlvr/reward.hpp"
#include "rlvr/types.hpp"

namespace rlvr {

// One sampled response together with everything the objectives need: the
// log-probs recorded at sampling time (behavior policy) and the log-probs
// recomputed under the current policy.
struct Trajectory {
  TokenSeq tokens;
  std::vector<int> states;  // context-state row per token, fixed at sampling
  Vector old_logprobs;
  Vector new_logprobs;
  RewardBreakdown reward;
  double advantage = 0.0;

  int length() const { return static_cast<int>(tokens.size()); }
  void validate() const;
};

// One query with its G sampled responses and their standardized advantages.
// When the group's rewards have zero variance the advantages are all exactly
// zero and `degenerate` is set.
struct Group {
  Query query;
  std::vector<Trajectory> trajectories;
  std::vector<double> advantages;
  bool degenerate = false;
};

struct AdvantageResult {
  std::vector<double> advantages;
  bool degenerate = false;
};

// (r_i - mean) / std with the population (divide-by-G) standard deviation.
// Requires G >= 2 finite rewards. If std < eps_std the group is degenerate
// and every advantage is exactly zero.
AdvantageResult compute_advantages(std::span<const double> rewards,
                                   double eps_std = 1e-8);

/// Fills `group.advantages` and each trajectory's advantage from the recorded
/// reward totals.
void assign_group_advantages(Group& group, double eps_std = 1e-8);

}  // namespace rlvr
