// End-to-end checks of the command-line tool: exit codes, produced files,
// atomicity of the metrics stream, and byte-level reproducibility.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "rlvr/metrics.hpp"
#include "rlvr/policy.hpp"
#include "rlvr/tasks.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("  ok: %s\n", what.c_str());
  } else {
    std::printf("  FAILED: %s\n", what.c_str());
    ++failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = std::string(RLVR_CLI_PATH) + " " + args +
                          " >/dev/null 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const fs::path& path, const fs::path& dataset,
                  const std::string& extra = {}) {
  std::ofstream out(path);
  out << "algorithm gspo\n"
      << "prompts_per_batch 4\n"
      << "group_size 4\n"
      << "mini_batch 2\n"
      << "learning_rate 0.01\n"
      << "warmup_steps 5\n"
      << "max_len 16\n"
      << "l_buffer 4\n"
      << "num_states 256\n"
      << "total_steps 4\n"
      << "seed 7\n"
      << "dataset " << dataset.string() << "\n"
      << extra;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "rlvr_cli_tests";
  fs::remove_all(work);
  fs::create_directories(work);

  const fs::path dataset = work / "train.txt";
  rlvr::save_dataset(rlvr::generate_dataset(rlvr::TaskKind::COPY_ANSWER, 12,
                                            13, 3),
                     dataset.string());

  std::puts("usage errors exit 1");
  check(run("") == 1, "no subcommand");
  check(run("frobnicate") == 1, "unknown subcommand");
  check(run("train --config x.cfg") == 1, "missing required --out");
  check(run("gradcheck --algorithm gspo --trials 0") == 1, "trials=0");
  check(run("gradcheck --algorithm sappo --trials 1") == 1,
        "unknown algorithm");

  std::puts("gradcheck");
  check(run("gradcheck --algorithm luspo --trials 3 --seed 1") == 0,
        "luspo passes");
  check(run("gradcheck --algorithm grpo --trials 3 --seed 1") == 0,
        "grpo passes");

  std::puts("i/o errors exit 3 and leave no partial metrics");
  check(run("train --config " + (work / "missing.cfg").string() + " --out " +
            (work / "o1").string()) == 3,
        "missing config file");
  const fs::path bad_cfg = work / "bad_dataset.cfg";
  write_config(bad_cfg, work / "no_such_dataset.txt");
  check(run("train --config " + bad_cfg.string() + " --out " +
            (work / "o2").string()) == 3,
        "missing dataset file");
  check(!fs::exists(work / "o2" / "metrics.jsonl"),
        "no metrics file left behind");
  check(!fs::exists(work / "o2" / "metrics.jsonl.tmp"),
        "no temp metrics file left behind");

  std::puts("config errors exit 1");
  const fs::path unk_cfg = work / "unknown_key.cfg";
  write_config(unk_cfg, dataset, "learn_rate 5\n");
  check(run("train --config " + unk_cfg.string() + " --out " +
            (work / "o3").string()) == 1,
        "unknown config key");

  std::puts("train produces a complete run directory");
  const fs::path cfg = work / "run.cfg";
  write_config(cfg, dataset);
  const fs::path out_a = work / "run_a";
  check(run("train --config " + cfg.string() + " --out " + out_a.string()) ==
            0,
        "train exits 0");
  check(fs::exists(out_a / "metrics.jsonl"), "metrics written");
  check(fs::exists(out_a / "manifest.json"), "manifest written");
  check(fs::exists(out_a / "policy.txt"), "checkpoint written");
  const auto rows = rlvr::read_metrics_file((out_a / "metrics.jsonl").string());
  check(rows.size() == 4, "one metrics record per step");
  const rlvr::PolicyParams p =
      rlvr::load_policy((out_a / "policy.txt").string());
  check(p.vocab_size == 13, "checkpoint loads");

  std::puts("reruns are byte-identical");
  const fs::path out_b = work / "run_b";
  check(run("train --config " + cfg.string() + " --out " + out_b.string()) ==
            0,
        "second run exits 0");
  check(slurp(out_a / "metrics.jsonl") == slurp(out_b / "metrics.jsonl"),
        "metrics byte-identical");
  check(slurp(out_a / "policy.txt") == slurp(out_b / "policy.txt"),
        "checkpoints byte-identical");

  std::puts("cli overrides");
  const fs::path out_c = work / "run_c";
  check(run("train --config " + cfg.string() + " --out " + out_c.string() +
            " --steps 2 --algorithm luspo") == 0,
        "override run exits 0");
  check(rlvr::read_metrics_file((out_c / "metrics.jsonl").string()).size() ==
            2,
        "steps override respected");
  check(slurp(out_c / "manifest.json").find("luspo") != std::string::npos,
        "algorithm override recorded in the manifest");

  std::puts("report");
  const fs::path curves = work / "curves.tsv";
  check(run("report --out " + curves.string() + " " +
            (out_a / "metrics.jsonl").string() + " " +
            (out_c / "metrics.jsonl").string()) == 0,
        "report exits 0");
  const std::string table = slurp(curves);
  check(table.find("step") == 0, "header row present");
  check(table.find("NA") != std::string::npos,
        "shorter run padded with missing-value markers");
  check(run("report --out " + curves.string() + " " +
            (work / "missing.jsonl").string()) == 3,
        "missing metrics file exits 3");
  const fs::path broken = work / "broken.jsonl";
  std::ofstream(broken) << "oops\n";
  check(run("report --out " + curves.string() + " " + broken.string()) == 3,
        "malformed metrics file exits 3");

  std::puts("biasdemo");
  const fs::path demo = work / "demo";
  check(run("biasdemo --out " + demo.string() + " --steps 6 --seed 5") == 0,
        "short demo exits 0");
  check(fs::exists(demo / "gspo" / "metrics.jsonl"), "gspo metrics written");
  check(fs::exists(demo / "luspo" / "metrics.jsonl"), "luspo metrics written");
  const std::string summary = slurp(demo / "summary.json");
  check(summary.find("\"insufficient_steps\": true") != std::string::npos,
        "short run flagged as insufficient for a trend");

  fs::remove_all(work);
  if (failures == 0) {
    std::puts("all cli tests passed");
    return 0;
  }
  std::printf("%d cli test(s) failed\n", failures);
  return 1;
}
