#include "rlvr/demo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rlvr/rng.hpp"

namespace rlvr {

namespace {

constexpr std::uint64_t kDemoLane = 0x5ef6ull;

std::uint64_t demo_run_seed(std::uint64_t seed) {
  return derive_seed(seed, 0, kDemoLane);
}

}  // namespace

// Demo regime, chosen so the loss-function effects are visible at desk
// scale:
//  - the prompt pool is smaller than the batch, so every rollout step
//    revisits queries across mini-batches. That reuse is the tabular
//    stand-in for weight sharing; without it the later mini-batches of a
//    step would see ratios of exactly 1 and sequence-level clipping would
//    never engage.
//  - the learning rate sits at the scale of the clip band, so the
//    asymmetric band decides which side clips rather than every moved item
//    clipping at once.
//  - a negative end-of-sequence bias lengthens initial responses, leaving
//    room for collapse to show.
TrainConfig bias_demo_config(Algorithm algorithm, int steps,
                             std::uint64_t seed) {
  TrainConfig cfg;
  cfg.objective = ObjectiveConfig::defaults(algorithm);
  cfg.total_steps = steps;
  cfg.rng_seed = demo_run_seed(seed);
  cfg.mini_batch = 2;  // 8 updates per rollout step
  cfg.val_fraction = 0.0;
  cfg.learning_rate = 2e-3;
  cfg.init_scale = 1.0;
  cfg.eos_bias = -0.5;
  return cfg;
}

Dataset bias_demo_dataset(std::uint64_t seed) {
  return generate_dataset(TaskKind::COPY_ANSWER, 12, 7,
                          derive_seed(demo_run_seed(seed), 0, 0xdecadeull));
}

int trend_window(int total_steps) {
  const int fifth = (total_steps + 4) / 5;  // ceil(20%)
  return std::min(total_steps, std::max(fifth, 10));
}

std::pair<double, double> window_mean_lengths(
    const std::vector<StepMetrics>& history, int window) {
  const auto n = history.size();
  const auto w = static_cast<std::size_t>(window);
  double first = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    first += history[i].mean_response_length;
    last += history[n - w + i].mean_response_length;
  }
  return {first / static_cast<double>(w), last / static_cast<double>(w)};
}

nlohmann::json to_json(const BiasDemoSummary& s) {
  return nlohmann::json{
      {"steps", s.steps},
      {"seed", s.seed},
      {"window", s.window},
      {"insufficient_steps", s.insufficient_steps},
      {"gspo_initial_mean_len", s.gspo_initial_mean_len},
      {"gspo_final_mean_len", s.gspo_final_mean_len},
      {"luspo_initial_mean_len", s.luspo_initial_mean_len},
      {"luspo_final_mean_len", s.luspo_final_mean_len},
      {"luspo_to_gspo_length_ratio", s.luspo_to_gspo_length_ratio},
      {"gspo_clipped_pos", s.gspo_clipped_pos},
      {"gspo_clipped_neg", s.gspo_clipped_neg},
      {"luspo_clipped_pos", s.luspo_clipped_pos},
      {"luspo_clipped_neg", s.luspo_clipped_neg},
      {"gspo_collapse", s.gspo_collapse},
      {"luspo_longer", s.luspo_longer}};
}

namespace {

struct LegResult {
  std::vector<StepMetrics> history;
  std::int64_t clipped_pos = 0;
  std::int64_t clipped_neg = 0;
};

LegResult run_leg(Algorithm algorithm, const Dataset& dataset, int steps,
                  std::uint64_t seed, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  MetricsWriter writer((dir / "metrics.jsonl").string());
  TrainHooks hooks;
  hooks.on_step = [&](const StepMetrics& m) { writer.append(m); };
  const TrainConfig cfg = bias_demo_config(algorithm, steps, seed);
  const TrainResult result = train(dataset, cfg, hooks);
  writer.finalize();

  LegResult leg;
  leg.history = result.history;
  for (const StepMetrics& m : leg.history) {
    leg.clipped_pos += m.clipped_pos;
    leg.clipped_neg += m.clipped_neg;
  }
  return leg;
}

}  // namespace

BiasDemoSummary run_bias_demo(const std::string& out_dir, int steps,
                              std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  const std::filesystem::path out(out_dir);
  std::filesystem::create_directories(out);

  const Dataset dataset = bias_demo_dataset(seed);
  const LegResult gspo =
      run_leg(Algorithm::GSPO, dataset, steps, seed, out / "gspo");
  const LegResult luspo =
      run_leg(Algorithm::LUSPO, dataset, steps, seed, out / "luspo");

  BiasDemoSummary s;
  s.steps = steps;
  s.seed = seed;
  s.window = trend_window(steps);
  s.insufficient_steps = 2 * s.window > steps;
  std::tie(s.gspo_initial_mean_len, s.gspo_final_mean_len) =
      window_mean_lengths(gspo.history, s.window);
  std::tie(s.luspo_initial_mean_len, s.luspo_final_mean_len) =
      window_mean_lengths(luspo.history, s.window);
  s.luspo_to_gspo_length_ratio =
      s.gspo_final_mean_len > 0.0
          ? s.luspo_final_mean_len / s.gspo_final_mean_len
          : std::numeric_limits<double>::quiet_NaN();
  s.gspo_clipped_pos = gspo.clipped_pos;
  s.gspo_clipped_neg = gspo.clipped_neg;
  s.luspo_clipped_pos = luspo.clipped_pos;
  s.luspo_clipped_neg = luspo.clipped_neg;
  s.gspo_collapse = s.gspo_final_mean_len < s.gspo_initial_mean_len;
  s.luspo_longer = s.luspo_final_mean_len > s.gspo_final_mean_len;

  std::ofstream summary(out / "summary.json");
  if (!summary) throw IoError("cannot write summary.json in " + out_dir);
  summary << to_json(s).dump(2) << "\n";
  return s;
}

}  // namespace rlvr
