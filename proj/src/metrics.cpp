#include "rlvr/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <system_error>

#include "rlvr/types.hpp"

namespace rlvr {

nlohmann::json to_json(const StepMetrics& m) {
  nlohmann::json j{{"step", m.step},
                   {"mean_len", m.mean_response_length},
                   {"max_len", m.max_response_length},
                   {"mean_accuracy_reward", m.mean_accuracy_reward},
                   {"objective_value", m.objective_value},
                   {"clipped_pos", m.clipped_pos},
                   {"clipped_neg", m.clipped_neg},
                   {"grad_norm", m.grad_norm},
                   {"lr", m.lr}};
  if (m.val_accuracy) j["val_accuracy"] = *m.val_accuracy;
  return j;
}

StepMetrics step_metrics_from_json(const nlohmann::json& j) {
  StepMetrics m;
  m.step = j.at("step").get<int>();
  m.mean_response_length = j.at("mean_len").get<double>();
  m.max_response_length = j.at("max_len").get<int>();
  m.mean_accuracy_reward = j.at("mean_accuracy_reward").get<double>();
  m.objective_value = j.at("objective_value").get<double>();
  m.clipped_pos = j.at("clipped_pos").get<std::int64_t>();
  m.clipped_neg = j.at("clipped_neg").get<std::int64_t>();
  m.grad_norm = j.at("grad_norm").get<double>();
  m.lr = j.at("lr").get<double>();
  if (j.contains("val_accuracy")) {
    m.val_accuracy = j.at("val_accuracy").get<double>();
  }
  return m;
}

void append_metrics_line(std::ostream& out, const StepMetrics& m) {
  out << to_json(m).dump() << "\n";
}

MetricsWriter::MetricsWriter(std::string path)
    : path_(std::move(path)), tmp_path_(path_ + ".tmp") {
  out_.open(tmp_path_);
  if (!out_) throw IoError("cannot open metrics file: " + tmp_path_);
}

MetricsWriter::~MetricsWriter() {
  if (!finalized_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);
  }
}

void MetricsWriter::append(const StepMetrics& m) {
  append_metrics_line(out_, m);
  out_.flush();
  if (!out_) throw IoError("write failed: " + tmp_path_);
}

void MetricsWriter::finalize() {
  out_.close();
  std::error_code ec;
  std::filesystem::rename(tmp_path_, path_, ec);
  if (ec) throw IoError("cannot finalize metrics file: " + path_);
  finalized_ = true;
}

std::vector<StepMetrics> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file: " + path);
  std::vector<StepMetrics> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(step_metrics_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed metrics record at " + path + ":" +
                    std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace rlvr
