// Command-line driver: train runs one experiment from a config file,
// gradcheck verifies analytic gradients against central differences,
// biasdemo runs the matched-seed GSPO/LUSPO length comparison, and report
// flattens metrics streams into plot-ready tables.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical failure, 3 I/O.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlvr/config_file.hpp"
#include "rlvr/demo.hpp"
#include "rlvr/gradcheck.hpp"
#include "rlvr/report.hpp"
#include "rlvr/trainer.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

rlvr::Algorithm parse_algorithm_or_throw(const std::string& name) {
  const auto a = rlvr::parse_algorithm(name);
  if (!a) {
    throw std::invalid_argument("unknown algorithm '" + name +
                                "' (expected grpo, gspo or luspo)");
  }
  return *a;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed,
              const std::optional<int>& steps,
              const std::optional<std::string>& algorithm) {
  rlvr::RunSpec spec = rlvr::parse_run_config(config_path);
  if (seed) spec.train.rng_seed = *seed;
  if (steps) spec.train.total_steps = *steps;
  if (algorithm) {
    spec.train.objective =
        rlvr::ObjectiveConfig::defaults(parse_algorithm_or_throw(*algorithm));
  }
  spec.train.validate();

  const rlvr::Dataset dataset = rlvr::load_dataset(spec.dataset_path);
  const std::filesystem::path out(out_dir);
  std::filesystem::create_directories(out);

  {
    std::ofstream manifest(out / "manifest.json");
    if (!manifest) throw rlvr::IoError("cannot write manifest in " + out_dir);
    manifest << rlvr::run_spec_manifest(spec).dump(2) << "\n";
  }

  rlvr::MetricsWriter metrics((out / "metrics.jsonl").string());
  rlvr::TrainHooks hooks;
  hooks.on_step = [&](const rlvr::StepMetrics& m) { metrics.append(m); };

  const rlvr::TrainResult result = rlvr::train(dataset, spec.train, hooks);
  rlvr::save_policy(result.params, (out / "policy.txt").string());
  metrics.finalize();

  std::cout << "train: " << rlvr::to_string(spec.train.objective.algorithm)
            << ", " << result.history.size() << " steps, checkpoint "
            << (out / "policy.txt").string() << "\n";
  if (!result.history.empty()) {
    const auto& last = result.history.back();
    std::cout << "final: mean_len=" << last.mean_response_length
              << " mean_accuracy_reward=" << last.mean_accuracy_reward << "\n";
  }
  return 0;
}

int cmd_gradcheck(const std::string& algorithm, int trials,
                  std::uint64_t seed) {
  const rlvr::GradCheckReport report = rlvr::run_gradcheck(
      parse_algorithm_or_throw(algorithm), trials, seed);
  std::printf("gradcheck %s: trials=%d max_rel_err=%.3e tolerance=%.0e -> %s\n",
              algorithm.c_str(), report.trials, report.max_rel_error,
              report.tolerance, report.pass ? "PASS" : "FAIL");
  if (!report.pass) {
    std::fprintf(stderr,
                 "worst trial %d: |analytic|=%.6e |numeric|=%.6e "
                 "rel_err=%.3e\n",
                 report.worst_trial, report.worst_analytic_norm,
                 report.worst_numeric_norm, report.max_rel_error);
    return kExitNumerical;
  }
  return 0;
}

int cmd_biasdemo(const std::string& out_dir, int steps, std::uint64_t seed) {
  const rlvr::BiasDemoSummary s = rlvr::run_bias_demo(out_dir, steps, seed);
  std::cout << "biasdemo: " << steps << " steps, trend window " << s.window
            << "\n";
  if (s.insufficient_steps) {
    std::cout << "warning: insufficient steps for trend\n";
  }
  std::printf("gspo  mean_len: initial=%.3f final=%.3f%s\n",
              s.gspo_initial_mean_len, s.gspo_final_mean_len,
              s.gspo_collapse ? "  (collapsed)" : "");
  std::printf("luspo mean_len: initial=%.3f final=%.3f\n",
              s.luspo_initial_mean_len, s.luspo_final_mean_len);
  std::printf("luspo/gspo final length ratio: %.3f\n",
              s.luspo_to_gspo_length_ratio);
  std::printf("gspo clip counts: pos=%lld neg=%lld\n",
              static_cast<long long>(s.gspo_clipped_pos),
              static_cast<long long>(s.gspo_clipped_neg));
  std::cout << "summary written to " << out_dir << "/summary.json\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& paths,
               const std::string& out_path) {
  std::vector<rlvr::RunCurves> runs;
  for (const std::string& p : paths) {
    runs.push_back({p, rlvr::read_metrics_file(p)});
  }
  const std::string table = rlvr::build_curve_table(runs);
  std::ofstream out(out_path);
  if (!out) throw rlvr::IoError("cannot open output file: " + out_path);
  out << table;
  std::cout << "report: " << paths.size() << " run(s) -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale laboratory for group-relative policy optimization"};
  app.require_subcommand(1);

  std::string config_path, out_dir, algorithm, report_out = "curves.tsv";
  std::uint64_t seed = 0;
  int steps = 900;
  int trials = 50;
  std::vector<std::string> metrics_paths;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> steps_override;
  std::optional<std::string> algorithm_override;

  CLI::App* train = app.add_subcommand("train", "run one training experiment");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train
      ->add_option_function<std::uint64_t>(
          "--seed", [&](std::uint64_t v) { seed_override = v; },
          "override the config seed")
      ->expected(1);
  train
      ->add_option_function<int>(
          "--steps", [&](int v) { steps_override = v; },
          "override total_steps")
      ->expected(1);
  train
      ->add_option_function<std::string>(
          "--algorithm", [&](const std::string& v) { algorithm_override = v; },
          "override the algorithm (grpo|gspo|luspo)")
      ->expected(1);

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "verify analytic gradients");
  gradcheck->add_option("--algorithm", algorithm, "grpo|gspo|luspo")
      ->required();
  gradcheck->add_option("--trials", trials, "random batches to check");
  gradcheck->add_option("--seed", seed, "rng seed");

  CLI::App* biasdemo = app.add_subcommand(
      "biasdemo", "matched-seed gspo vs luspo length comparison");
  biasdemo->add_option("--out", out_dir, "output directory")->required();
  biasdemo->add_option("--steps", steps, "training steps per run");
  biasdemo->add_option("--seed", seed, "rng seed");

  CLI::App* report =
      app.add_subcommand("report", "flatten metrics files into a curve table");
  report->add_option("--out", report_out, "output table path");
  report->add_option("paths", metrics_paths, "metrics.jsonl files")
      ->required()
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      return cmd_train(config_path, out_dir, seed_override, steps_override,
                       algorithm_override);
    }
    if (gradcheck->parsed()) {
      if (trials < 1) {
        std::cerr << "usage error: --trials must be at least 1\n";
        return kExitUsage;
      }
      return cmd_gradcheck(algorithm, trials, seed);
    }
    if (biasdemo->parsed()) return cmd_biasdemo(out_dir, steps, seed);
    if (report->parsed()) return cmd_report(metrics_paths, report_out);
  } catch (const rlvr::ConfigError& e) {
    std::cerr << "config error (key '" << e.key << "'): " << e.what() << "\n";
    return kExitUsage;
  } catch (const rlvr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const rlvr::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
