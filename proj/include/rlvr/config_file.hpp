#pragma once

#include <string>

#include <json.hpp>

#include "rlvr/trainer.hpp"

namespace rlvr {

struct RunSpec {
  TrainConfig train;
  std::string dataset_path;
};

// Key-value text, one `key value` pair per line, '#' starts a comment.
// Recognized keys mirror TrainConfig (see README); `dataset` is required.
// Throws ConfigError naming the offending key.
RunSpec parse_run_config(const std::string& path);

/// Config echo written into the run manifest.
nlohmann::json run_spec_manifest(const RunSpec& spec);

}  // namespace rlvr
