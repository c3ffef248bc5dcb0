#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rlvr {

// One line of the metrics stream. Serialized as JSONL with keys
// step, mean_len, max_len, mean_accuracy_reward, objective_value,
// clipped_pos, clipped_neg, grad_norm, lr and, on evaluation steps,
// val_accuracy.
struct StepMetrics {
  int step = 0;
  double mean_response_length = 0.0;
  int max_response_length = 0;
  double mean_accuracy_reward = 0.0;
  double objective_value = 0.0;
  std::int64_t clipped_pos = 0;
  std::int64_t clipped_neg = 0;
  double grad_norm = 0.0;
  double lr = 0.0;
  std::optional<double> val_accuracy;
};

nlohmann::json to_json(const StepMetrics& m);
StepMetrics step_metrics_from_json(const nlohmann::json& j);

void append_metrics_line(std::ostream& out, const StepMetrics& m);

/// Throws IoError naming the line number on a malformed record.
std::vector<StepMetrics> read_metrics_file(const std::string& path);

// Streams records to `<path>.tmp` and renames onto `path` when finalized, so
// an aborted run leaves no partial metrics file behind.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::string path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void append(const StepMetrics& m);
  void finalize();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool finalized_ = false;
};

}  // namespace rlvr
