// Independent reference implementations used only to check the library.
// Plain loops over std::vector, no shared code with the implementation path.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rlvr/advantage.hpp"
#include "rlvr/objective.hpp"

namespace oracle {

inline double log_softmax(const std::vector<double>& logits, int next,
                          double temperature) {
  double mx = logits[0] / temperature;
  for (double z : logits) mx = std::max(mx, z / temperature);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z / temperature - mx);
  return logits[static_cast<std::size_t>(next)] / temperature - mx -
         std::log(sum);
}

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double population_std(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

inline std::vector<double> advantages(std::span<const double> rewards,
                                      double eps_std) {
  const double sd = population_std(rewards);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < eps_std) return out;
  const double m = mean(rewards);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = (rewards[i] - m) / sd;
  }
  return out;
}

// Clipped surrogate value computed with naive token loops straight from the
// definitions.
inline double objective_value(std::span<const rlvr::Group> groups,
                              rlvr::Algorithm alg, double eps_low,
                              double eps_high) {
  double group_sum = 0.0;
  for (const rlvr::Group& g : groups) {
    double traj_sum = 0.0;
    for (const rlvr::Trajectory& traj : g.trajectories) {
      const double a = traj.advantage;
      const int len = traj.length();
      double value = 0.0;
      if (alg == rlvr::Algorithm::GRPO) {
        double inner = 0.0;
        for (int t = 0; t < len; ++t) {
          const double w =
              std::exp(traj.new_logprobs(t) - traj.old_logprobs(t));
          double clipped = w;
          if (clipped < 1.0 - eps_low) clipped = 1.0 - eps_low;
          if (clipped > 1.0 + eps_high) clipped = 1.0 + eps_high;
          inner += std::min(w * a, clipped * a);
        }
        value = inner / len;
      } else {
        double diff_sum = 0.0;
        for (int t = 0; t < len; ++t) {
          diff_sum += traj.new_logprobs(t) - traj.old_logprobs(t);
        }
        const double s = std::exp(diff_sum / len);
        double clipped = s;
        if (clipped < 1.0 - eps_low) clipped = 1.0 - eps_low;
        if (clipped > 1.0 + eps_high) clipped = 1.0 + eps_high;
        value = std::min(s * a, clipped * a);
        if (alg == rlvr::Algorithm::LUSPO) value *= len;
      }
      traj_sum += value;
    }
    group_sum += traj_sum / static_cast<double>(g.trajectories.size());
  }
  return group_sum / static_cast<double>(groups.size());
}

struct ClipCounts {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

inline ClipCounts recount_clips(std::span<const rlvr::Group> groups,
                                rlvr::Algorithm alg, double eps_low,
                                double eps_high) {
  ClipCounts c;
  auto tally = [&](double ratio, double a) {
    if (a > 0.0 && ratio > 1.0 + eps_high) ++c.pos;
    if (a < 0.0 && ratio < 1.0 - eps_low) ++c.neg;
  };
  for (const rlvr::Group& g : groups) {
    for (const rlvr::Trajectory& traj : g.trajectories) {
      if (alg == rlvr::Algorithm::GRPO) {
        for (int t = 0; t < traj.length(); ++t) {
          tally(std::exp(traj.new_logprobs(t) - traj.old_logprobs(t)),
                traj.advantage);
        }
      } else {
        double diff_sum = 0.0;
        for (int t = 0; t < traj.length(); ++t) {
          diff_sum += traj.new_logprobs(t) - traj.old_logprobs(t);
        }
        tally(std::exp(diff_sum / traj.length()), traj.advantage);
      }
    }
  }
  return c;
}

}  // namespace oracle
