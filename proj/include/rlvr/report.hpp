#pragma once

#include <span>
#include <string>
#include <vector>

#include "rlvr/metrics.hpp"

namespace rlvr {

struct RunCurves {
  std::string name;
  std::vector<StepMetrics> rows;
};

// Tab-separated table, one row per step present in any run, one column per
// (run, metric) pair. Steps absent from a run are written as "NA". Values
// use shortest-round-trip formatting, so parsing the table back recovers the
// source metrics exactly.
std::string build_curve_table(std::span<const RunCurves> runs);

}  // namespace rlvr
