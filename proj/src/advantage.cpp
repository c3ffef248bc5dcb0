#include "rlvr/advantage.hpp"

#include <cmath>

namespace rlvr {

void Trajectory::validate() const {
  const auto n = static_cast<Eigen::Index>(tokens.size());
  if (n < 1) throw std::invalid_argument("trajectory must be non-empty");
  if (static_cast<Eigen::Index>(states.size()) != n ||
      old_logprobs.size() != n || new_logprobs.size() != n) {
    throw std::invalid_argument("trajectory field lengths disagree");
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!std::isfinite(old_logprobs(t)) || old_logprobs(t) > 0.0 ||
        !std::isfinite(new_logprobs(t)) || new_logprobs(t) > 0.0) {
      throw std::invalid_argument("trajectory log-probs must be finite and <= 0");
    }
  }
}

AdvantageResult compute_advantages(std::span<const double> rewards,
                                   double eps_std) {
  const auto g = rewards.size();
  if (g < 2) throw std::invalid_argument("group size must be at least 2");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
  }

  const Eigen::Map<const Vector> r(rewards.data(),
                                   static_cast<Eigen::Index>(g));
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / static_cast<double>(g);
  const double std = std::sqrt(var);

  AdvantageResult out;
  out.advantages.resize(g, 0.0);
  if (std < eps_std) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < g; ++i) {
    out.advantages[i] = (rewards[i] - mean) / std;
  }
  return out;
}

void assign_group_advantages(Group& group, double eps_std) {
  std::vector<double> rewards;
  rewards.reserve(group.trajectories.size());
  for (const Trajectory& t : group.trajectories) {
    rewards.push_back(t.reward.total);
  }
  AdvantageResult res = compute_advantages(rewards, eps_std);
  group.advantages = res.advantages;
  group.degenerate = res.degenerate;
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    group.trajectories[i].advantage = res.advantages[i];
  }
}

}  // namespace rlvr
