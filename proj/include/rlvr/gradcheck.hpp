#pragma once

#include <cstdint>
#include <vector>

#include "rlvr/objective.hpp"

namespace rlvr {

// Randomized batch for gradient verification: trajectories sampled from a
// base policy, advantages from randomized rewards, new_logprobs recomputed
// under a perturbed copy of the base so ratios straddle the clip band.
// Batches whose ratios land within `boundary_margin` of a clip boundary are
// resampled, since central differences are meaningless across the kink.
struct GradCheckCase {
  PolicyParams params;
  std::vector<Group> groups;
  double temperature = 1.0;
};

GradCheckCase make_gradcheck_case(const ObjectiveConfig& cfg,
                                  std::uint64_t seed,
                                  double boundary_margin = 1e-4);

/// Central finite differences of the batch objective w.r.t. every logit.
Matrix fd_objective_gradient(const GradCheckCase& c, const ObjectiveConfig& cfg,
                             double fd_step);

/// Frobenius-norm relative difference, zero when both are (near) zero.
double norm_relative_error(const Matrix& a, const Matrix& b);

struct GradCheckReport {
  bool pass = false;
  int trials = 0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  int worst_trial = -1;
  double worst_analytic_norm = 0.0;
  double worst_numeric_norm = 0.0;
};

// Compares analytic objective gradients against central differences over
// `trials` random batches. Passes iff every trial's norm-relative error is
// below `tolerance`.
GradCheckReport run_gradcheck(Algorithm algorithm, int trials,
                              std::uint64_t seed, double fd_step = 1e-6,
                              double tolerance = 1e-6);

}  // namespace rlvr
