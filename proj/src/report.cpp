#include "rlvr/report.hpp"

#include <map>
#include <sstream>

namespace rlvr {

namespace {

const char* const kMetricColumns[] = {
    "mean_len",     "max_len",     "mean_accuracy_reward",
    "objective_value", "clipped_pos", "clipped_neg",
    "grad_norm",    "lr",          "val_accuracy"};

std::string cell(const nlohmann::json& record, const char* key) {
  if (!record.contains(key)) return "NA";
  return record.at(key).dump();
}

}  // namespace

std::string build_curve_table(std::span<const RunCurves> runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to report");

  std::map<int, std::vector<const StepMetrics*>> by_step;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const StepMetrics& m : runs[r].rows) {
      auto& row = by_step[m.step];
      row.resize(runs.size(), nullptr);
      row[r] = &m;
    }
  }

  std::ostringstream out;
  out << "step";
  for (const RunCurves& run : runs) {
    for (const char* metric : kMetricColumns) {
      out << '\t' << run.name << '.' << metric;
    }
  }
  out << '\n';

  for (const auto& [step, row] : by_step) {
    out << step;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (row.size() > r && row[r] != nullptr) {
        const nlohmann::json j = to_json(*row[r]);
        for (const char* metric : kMetricColumns) {
          out << '\t' << cell(j, metric);
        }
      } else {
        for (std::size_t k = 0; k < std::size(kMetricColumns); ++k) {
          out << "\tNA";
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace rlvr
