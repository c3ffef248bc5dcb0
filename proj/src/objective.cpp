#include "rlvr/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rlvr {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GRPO:
      return "grpo";
    case Algorithm::GSPO:
      return "gspo";
    case Algorithm::LUSPO:
      return "luspo";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "grpo" || name == "GRPO") return Algorithm::GRPO;
  if (name == "gspo" || name == "GSPO") return Algorithm::GSPO;
  if (name == "luspo" || name == "LUSPO") return Algorithm::LUSPO;
  return std::nullopt;
}

void ObjectiveConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low < 1.0) ||
      !(eps_high > 0.0 && eps_high < 1.0)) {
    throw std::invalid_argument("clip epsilons must lie in (0, 1)");
  }
}

ObjectiveConfig ObjectiveConfig::defaults(Algorithm a) {
  ObjectiveConfig cfg;
  cfg.algorithm = a;
  if (a == Algorithm::GRPO) {
    cfg.eps_low = 0.2;
    cfg.eps_high = 0.2;
  } else {
    cfg.eps_low = 2e-3;
    cfg.eps_high = 2.5e-3;
  }
  return cfg;
}

double token_ratio(const Trajectory& traj, int t) {
  if (t < 0 || t >= traj.length()) {
    throw std::invalid_argument("token index out of range");
  }
  const double r = std::exp(traj.new_logprobs(t) - traj.old_logprobs(t));
  if (!std::isfinite(r)) {
    throw NumericalError("non-finite token ratio at index " +
                         std::to_string(t));
  }
  return r;
}

double sequence_ratio(const Trajectory& traj) {
  if (traj.length() < 1) {
    throw std::invalid_argument("trajectory must be non-empty");
  }
  const double mean_diff =
      (traj.new_logprobs - traj.old_logprobs).sum() / traj.length();
  const double s = std::exp(mean_diff);
  if (!std::isfinite(s)) {
    throw NumericalError("non-finite sequence ratio");
  }
  return s;
}

ClipResult clip_ratio(double ratio, double advantage,
                      const ObjectiveConfig& cfg) {
  if (!(ratio > 0.0)) {
    throw std::invalid_argument("importance ratio must be positive");
  }
  const double clipped_ratio =
      std::clamp(ratio, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
  ClipResult res;
  res.term = std::min(ratio * advantage, clipped_ratio * advantage);
  res.clipped = (advantage > 0.0 && ratio > 1.0 + cfg.eps_high) ||
                (advantage < 0.0 && ratio < 1.0 - cfg.eps_low);
  return res;
}

namespace {

void check_batch(std::span<const Group> groups, const ObjectiveConfig& cfg) {
  cfg.validate();
  if (groups.empty()) throw std::invalid_argument("empty batch");
  for (const Group& g : groups) {
    if (g.trajectories.size() < 2) {
      throw std::invalid_argument("group size must be at least 2");
    }
    for (const Trajectory& t : g.trajectories) t.validate();
  }
}

ObjectiveReport evaluate_checked(std::span<const Group> groups,
                                 const ObjectiveConfig& cfg) {
  ObjectiveReport rep;
  double group_sum = 0.0;
  for (const Group& g : groups) {
    const auto group_size = static_cast<double>(g.trajectories.size());
    double traj_sum = 0.0;
    for (const Trajectory& traj : g.trajectories) {
      const double adv = traj.advantage;
      double value = 0.0;
      std::vector<bool> mask;
      switch (cfg.algorithm) {
        case Algorithm::GRPO: {
          mask.resize(traj.tokens.size());
          double token_sum = 0.0;
          for (int t = 0; t < traj.length(); ++t) {
            const ClipResult c = clip_ratio(token_ratio(traj, t), adv, cfg);
            token_sum += c.term;
            mask[static_cast<std::size_t>(t)] = c.clipped;
            if (c.clipped) (adv > 0.0 ? rep.clipped_pos : rep.clipped_neg)++;
          }
          value = token_sum / traj.length();
          break;
        }
        case Algorithm::GSPO:
        case Algorithm::LUSPO: {
          const ClipResult c = clip_ratio(sequence_ratio(traj), adv, cfg);
          value = cfg.algorithm == Algorithm::LUSPO ? c.term * traj.length()
                                                    : c.term;
          mask.assign(1, c.clipped);
          if (c.clipped) (adv > 0.0 ? rep.clipped_pos : rep.clipped_neg)++;
          break;
        }
      }
      rep.per_trajectory_values.push_back(value);
      rep.clip_mask.push_back(std::move(mask));
      traj_sum += value;
    }
    group_sum += traj_sum / group_size;
  }
  rep.value = group_sum / static_cast<double>(groups.size());
  return rep;
}

}  // namespace

ObjectiveReport evaluate_objective(std::span<const Group> groups,
                                   const ObjectiveConfig& cfg) {
  check_batch(groups, cfg);
  return evaluate_checked(groups, cfg);
}

ObjectiveReport grpo_objective(std::span<const Group> groups,
                               const ObjectiveConfig& cfg) {
  if (cfg.algorithm != Algorithm::GRPO) {
    throw std::invalid_argument("config does not select grpo");
  }
  return evaluate_objective(groups, cfg);
}

ObjectiveReport gspo_objective(std::span<const Group> groups,
                               const ObjectiveConfig& cfg) {
  if (cfg.algorithm != Algorithm::GSPO) {
    throw std::invalid_argument("config does not select gspo");
  }
  return evaluate_objective(groups, cfg);
}

ObjectiveReport luspo_objective(std::span<const Group> groups,
                                const ObjectiveConfig& cfg) {
  if (cfg.algorithm != Algorithm::LUSPO) {
    throw std::invalid_argument("config does not select luspo");
  }
  return evaluate_objective(groups, cfg);
}

std::vector<double> per_token_coefficients(const Trajectory& traj,
                                           const ObjectiveConfig& cfg) {
  cfg.validate();
  traj.validate();
  const double adv = traj.advantage;
  const int len = traj.length();
  std::vector<double> coeffs(static_cast<std::size_t>(len), 0.0);
  switch (cfg.algorithm) {
    case Algorithm::GRPO:
      for (int t = 0; t < len; ++t) {
        const double w = token_ratio(traj, t);
        if (!clip_ratio(w, adv, cfg).clipped) {
          coeffs[static_cast<std::size_t>(t)] = w * adv / len;
        }
      }
      break;
    case Algorithm::GSPO:
    case Algorithm::LUSPO: {
      const double s = sequence_ratio(traj);
      if (!clip_ratio(s, adv, cfg).clipped) {
        const double c =
            cfg.algorithm == Algorithm::GSPO ? s * adv / len : s * adv;
        std::fill(coeffs.begin(), coeffs.end(), c);
      }
      break;
    }
  }
  return coeffs;
}

namespace {

void check_shapes(const PolicyParams& params, const Trajectory& traj) {
  for (int t = 0; t < traj.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (traj.states[i] < 0 || traj.states[i] >= params.num_states() ||
        traj.tokens[i] < 0 || traj.tokens[i] >= params.vocab_size) {
      throw std::invalid_argument(
          "trajectory states/tokens do not fit the policy shape");
    }
  }
}

// Accumulates rows into a scratch that only materializes the visited states;
// trajectories touch at most |y| of the table's rows.
class RowScratch {
 public:
  RowScratch(int vocab) : vocab_(vocab) {}

  Eigen::RowVectorXd& row_for(int state) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (states_[i] == state) return rows_[i];
    }
    states_.push_back(state);
    rows_.emplace_back(Eigen::RowVectorXd::Zero(vocab_));
    return rows_.back();
  }

  void flush_into(Matrix& grad, double scale) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      grad.row(states_[i]) += scale * rows_[i];
    }
  }

  void clear() {
    states_.clear();
    rows_.clear();
  }

 private:
  int vocab_;
  std::vector<int> states_;
  std::vector<Eigen::RowVectorXd> rows_;
};

// Adds one trajectory's gradient, scaled by `outer`, into `grad`. GSPO and
// LUSPO accumulate the identical unweighted sum of log-prob gradient rows
// and apply their coefficient as a single final scale, which keeps the
// LUSPO = |y| * GSPO identity exact at the floating-point level.
void accumulate_trajectory(Matrix& grad, RowScratch& scratch,
                           const PolicyParams& params, const Trajectory& traj,
                           const ObjectiveConfig& cfg, double temperature,
                           double outer) {
  check_shapes(params, traj);
  scratch.clear();
  if (cfg.algorithm == Algorithm::GRPO) {
    const std::vector<double> coeffs = per_token_coefficients(traj, cfg);
    for (int t = 0; t < traj.length(); ++t) {
      const auto i = static_cast<std::size_t>(t);
      if (coeffs[i] == 0.0) continue;
      scratch.row_for(traj.states[i]) +=
          coeffs[i] *
          state_grad_row(params, traj.states[i], traj.tokens[i], temperature);
    }
    scratch.flush_into(grad, outer);
    return;
  }

  const double s = sequence_ratio(traj);
  if (clip_ratio(s, traj.advantage, cfg).clipped || traj.advantage == 0.0) {
    return;
  }
  for (int t = 0; t < traj.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    scratch.row_for(traj.states[i]) +=
        state_grad_row(params, traj.states[i], traj.tokens[i], temperature);
  }
  const double coeff = cfg.algorithm == Algorithm::GSPO
                           ? s * traj.advantage / traj.length()
                           : s * traj.advantage;
  scratch.flush_into(grad, coeff * outer);
}

}  // namespace

Matrix trajectory_gradient(const PolicyParams& params, const Trajectory& traj,
                           const ObjectiveConfig& cfg, double temperature) {
  cfg.validate();
  traj.validate();
  Matrix grad = Matrix::Zero(params.num_states(), params.vocab_size);
  RowScratch scratch(params.vocab_size);
  accumulate_trajectory(grad, scratch, params, traj, cfg, temperature, 1.0);
  return grad;
}

Matrix objective_gradient(std::span<const Group> groups,
                          const ObjectiveConfig& cfg,
                          const PolicyParams& params, double temperature) {
  check_batch(groups, cfg);
  params.validate();
  Matrix grad = Matrix::Zero(params.num_states(), params.vocab_size);
  RowScratch scratch(params.vocab_size);
  const double num_groups = static_cast<double>(groups.size());
  for (const Group& g : groups) {
    const double outer =
        1.0 / (static_cast<double>(g.trajectories.size()) * num_groups);
    for (const Trajectory& traj : g.trajectories) {
      accumulate_trajectory(grad, scratch, params, traj, cfg, temperature,
                            outer);
    }
  }
  return grad;
}

}  // namespace rlvr
