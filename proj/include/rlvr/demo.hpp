#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "rlvr/trainer.hpp"

namespace rlvr {

// Matched-seed GSPO vs LUSPO comparison on a length-neutral task. The two
// runs share the dataset, seed, and every hyperparameter except the
// objective, so step-0 rollouts are identical and all divergence comes from
// the loss.
struct BiasDemoSummary {
  int steps = 0;
  std::uint64_t seed = 0;
  int window = 0;  // steps per trend window (20% of the run, at least 10)
  bool insufficient_steps = false;

  double gspo_initial_mean_len = 0.0;
  double gspo_final_mean_len = 0.0;
  double luspo_initial_mean_len = 0.0;
  double luspo_final_mean_len = 0.0;
  double luspo_to_gspo_length_ratio = 0.0;

  std::int64_t gspo_clipped_pos = 0;
  std::int64_t gspo_clipped_neg = 0;
  std::int64_t luspo_clipped_pos = 0;
  std::int64_t luspo_clipped_neg = 0;

  bool gspo_collapse = false;  // final window below initial window
  bool luspo_longer = false;   // luspo final window above gspo's
};

nlohmann::json to_json(const BiasDemoSummary& s);

/// The exact training configuration one leg of the demo runs with.
TrainConfig bias_demo_config(Algorithm algorithm, int steps,
                             std::uint64_t seed);

/// The shared length-neutral dataset, derived deterministically from `seed`.
Dataset bias_demo_dataset(std::uint64_t seed);

int trend_window(int total_steps);

/// Mean of mean_len over the first and last `window` steps.
std::pair<double, double> window_mean_lengths(
    const std::vector<StepMetrics>& history, int window);

// Runs both legs, writes <out_dir>/gspo/metrics.jsonl,
// <out_dir>/luspo/metrics.jsonl and <out_dir>/summary.json.
BiasDemoSummary run_bias_demo(const std::string& out_dir, int steps,
                              std::uint64_t seed);

}  // namespace rlvr
