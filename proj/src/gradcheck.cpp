#include "rlvr/gradcheck.hpp"

#include <cmath>

#include "rlvr/rng.hpp"
#include "rlvr/trainer.hpp"

namespace rlvr {

namespace {

constexpr int kStates = 8;
constexpr int kVocab = 5;
constexpr int kGroups = 2;
constexpr int kGroupSize = 3;
constexpr int kMaxLen = 6;

// Without a clip the surrogate is smooth everywhere, so only the boundary on
// the advantage's clipping side matters.
bool near_active_boundary(double ratio, double advantage,
                          const ObjectiveConfig& cfg, double margin) {
  if (advantage > 0.0) return std::abs(ratio - (1.0 + cfg.eps_high)) < margin;
  if (advantage < 0.0) return std::abs(ratio - (1.0 - cfg.eps_low)) < margin;
  return false;
}

bool batch_clear_of_boundaries(const std::vector<Group>& groups,
                               const ObjectiveConfig& cfg, double margin) {
  for (const Group& g : groups) {
    for (const Trajectory& traj : g.trajectories) {
      if (cfg.algorithm == Algorithm::GRPO) {
        for (int t = 0; t < traj.length(); ++t) {
          if (near_active_boundary(token_ratio(traj, t), traj.advantage, cfg,
                                   margin)) {
            return false;
          }
        }
      } else if (near_active_boundary(sequence_ratio(traj), traj.advantage,
                                      cfg, margin)) {
        return false;
      }
    }
  }
  return true;
}

GradCheckCase make_case_attempt(const ObjectiveConfig& cfg,
                                std::uint64_t seed) {
  GradCheckCase c;
  const PolicyParams base =
      PolicyParams::random(kStates, kVocab, 1, derive_seed(seed, 1), 1.0);

  // Token-level ratios need a much larger policy drift than sequence-level
  // ones to reach their clip band.
  const double drift =
      cfg.algorithm == Algorithm::GRPO ? 0.35 : 0.02;
  c.params = base;
  Rng noise(derive_seed(seed, 2));
  for (Eigen::Index r = 0; r < c.params.logits.rows(); ++r) {
    for (Eigen::Index col = 0; col < c.params.logits.cols(); ++col) {
      c.params.logits(r, col) += drift * noise.normal();
    }
  }

  Rng rew(derive_seed(seed, 3));
  for (int gi = 0; gi < kGroups; ++gi) {
    Group group;
    group.query.id = gi;
    group.query.prompt_tokens = {
        static_cast<TokenId>(rew.uniform_below(kVocab)),
        static_cast<TokenId>(rew.uniform_below(kVocab))};
    for (int r = 0; r < kGroupSize; ++r) {
      const SampleResult s = sample_response(
          base, group.query, kMaxLen, 1.0, 1.0,
          derive_seed(seed, 4, static_cast<std::uint64_t>(gi),
                      static_cast<std::uint64_t>(r)));
      Trajectory traj;
      traj.tokens = s.tokens;
      traj.states = s.states;
      traj.old_logprobs = s.logprobs;
      traj.new_logprobs = s.logprobs;
      static constexpr double kRewardLevels[] = {0.0, 0.5, 1.0, 1.5};
      traj.reward.total = kRewardLevels[rew.uniform_below(4)];
      group.trajectories.push_back(std::move(traj));
    }
    assign_group_advantages(group);
    recompute_new_logprobs(c.params, group, c.temperature);
    c.groups.push_back(std::move(group));
  }
  return c;
}

}  // namespace

GradCheckCase make_gradcheck_case(const ObjectiveConfig& cfg,
                                  std::uint64_t seed, double boundary_margin) {
  for (std::uint64_t attempt = 0; attempt < 256; ++attempt) {
    GradCheckCase c = make_case_attempt(cfg, derive_seed(seed, attempt, 7));
    if (batch_clear_of_boundaries(c.groups, cfg, boundary_margin)) return c;
  }
  throw NumericalError("could not draw a batch clear of clip boundaries");
}

Matrix fd_objective_gradient(const GradCheckCase& c, const ObjectiveConfig& cfg,
                             double fd_step) {
  PolicyParams params = c.params;
  std::vector<Group> groups = c.groups;
  auto eval = [&]() {
    for (Group& g : groups) recompute_new_logprobs(params, g, c.temperature);
    return evaluate_objective(groups, cfg).value;
  };

  Matrix fd(params.logits.rows(), params.logits.cols());
  for (Eigen::Index r = 0; r < params.logits.rows(); ++r) {
    for (Eigen::Index col = 0; col < params.logits.cols(); ++col) {
      const double saved = params.logits(r, col);
      params.logits(r, col) = saved + fd_step;
      const double up = eval();
      params.logits(r, col) = saved - fd_step;
      const double down = eval();
      params.logits(r, col) = saved;
      fd(r, col) = (up - down) / (2.0 * fd_step);
    }
  }
  return fd;
}

double norm_relative_error(const Matrix& a, const Matrix& b) {
  const double den = std::max(a.norm(), b.norm());
  if (den < 1e-12) return 0.0;
  return (a - b).norm() / den;
}

GradCheckReport run_gradcheck(Algorithm algorithm, int trials,
                              std::uint64_t seed, double fd_step,
                              double tolerance) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  ObjectiveConfig cfg = ObjectiveConfig::defaults(algorithm);

  GradCheckReport report;
  report.trials = trials;
  report.tolerance = tolerance;
  for (int i = 0; i < trials; ++i) {
    const GradCheckCase c =
        make_gradcheck_case(cfg, derive_seed(seed, static_cast<std::uint64_t>(i)));
    const Matrix analytic =
        objective_gradient(c.groups, cfg, c.params, c.temperature);
    const Matrix numeric = fd_objective_gradient(c, cfg, fd_step);
    const double err = norm_relative_error(analytic, numeric);
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_trial = i;
      report.worst_analytic_norm = analytic.norm();
      report.worst_numeric_norm = numeric.norm();
    }
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace rlvr
