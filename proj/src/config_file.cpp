#include "rlvr/config_file.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rlvr {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) {
    throw ConfigError(key, "bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

}  // namespace

RunSpec parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);

  RunSpec spec;
  TrainConfig& t = spec.train;
  bool algorithm_set = false;
  bool eps_set = false;

  const std::map<std::string, std::function<void(const std::string&)>>
      setters{
          {"algorithm",
           [&](const std::string& v) {
             const auto a = parse_algorithm(v);
             if (!a) {
               throw ConfigError("algorithm", "unknown algorithm '" + v + "'");
             }
             const ObjectiveConfig base = ObjectiveConfig::defaults(*a);
             if (!eps_set) {
               t.objective = base;
             } else {
               t.objective.algorithm = *a;
             }
             algorithm_set = true;
           }},
          {"eps_low",
           [&](const std::string& v) {
             t.objective.eps_low = parse_number<double>("eps_low", v);
             eps_set = true;
           }},
          {"eps_high",
           [&](const std::string& v) {
             t.objective.eps_high = parse_number<double>("eps_high", v);
             eps_set = true;
           }},
          {"prompts_per_batch",
           [&](const std::string& v) {
             t.prompts_per_batch = parse_number<int>("prompts_per_batch", v);
           }},
          {"group_size",
           [&](const std::string& v) {
             t.group_size = parse_number<int>("group_size", v);
           }},
          {"mini_batch",
           [&](const std::string& v) {
             t.mini_batch = parse_number<int>("mini_batch", v);
           }},
          {"learning_rate",
           [&](const std::string& v) {
             t.learning_rate = parse_number<double>("learning_rate", v);
           }},
          {"warmup_steps",
           [&](const std::string& v) {
             t.warmup_steps = parse_number<int>("warmup_steps", v);
           }},
          {"max_len",
           [&](const std::string& v) {
             t.max_len = parse_number<int>("max_len", v);
           }},
          {"temperature",
           [&](const std::string& v) {
             t.temperature = parse_number<double>("temperature", v);
           }},
          {"top_p",
           [&](const std::string& v) {
             t.top_p = parse_number<double>("top_p", v);
           }},
          {"total_steps",
           [&](const std::string& v) {
             t.total_steps = parse_number<int>("total_steps", v);
           }},
          {"seed",
           [&](const std::string& v) {
             t.rng_seed = parse_number<std::uint64_t>("seed", v);
           }},
          {"num_states",
           [&](const std::string& v) {
             t.num_states = parse_number<int>("num_states", v);
           }},
          {"context_order",
           [&](const std::string& v) {
             t.context_order = parse_number<int>("context_order", v);
           }},
          {"init_scale",
           [&](const std::string& v) {
             t.init_scale = parse_number<double>("init_scale", v);
           }},
          {"eos_bias",
           [&](const std::string& v) {
             t.eos_bias = parse_number<double>("eos_bias", v);
           }},
          {"l_buffer",
           [&](const std::string& v) {
             t.l_buffer = parse_number<int>("l_buffer", v);
           }},
          {"penalty_scale",
           [&](const std::string& v) {
             t.penalty_scale = parse_number<double>("penalty_scale", v);
           }},
          {"beta1",
           [&](const std::string& v) {
             t.adam.beta1 = parse_number<double>("beta1", v);
           }},
          {"beta2",
           [&](const std::string& v) {
             t.adam.beta2 = parse_number<double>("beta2", v);
           }},
          {"adam_eps",
           [&](const std::string& v) {
             t.adam.epsilon = parse_number<double>("adam_eps", v);
           }},
          {"weight_decay",
           [&](const std::string& v) {
             t.adam.weight_decay = parse_number<double>("weight_decay", v);
           }},
          {"eval_every",
           [&](const std::string& v) {
             t.eval_every = parse_number<int>("eval_every", v);
           }},
          {"val_fraction",
           [&](const std::string& v) {
             t.val_fraction = parse_number<double>("val_fraction", v);
           }},
          {"dataset",
           [&](const std::string& v) { spec.dataset_path = v; }},
      };

  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    std::getline(ls, value);
    const auto first = value.find_first_not_of(" \t");
    value = first == std::string::npos ? std::string{} : value.substr(first);
    const auto last = value.find_last_not_of(" \t\r");
    if (last != std::string::npos) value.erase(last + 1);

    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError(key, "unknown config key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError(key, "missing value for key '" + key + "'");
    }
    it->second(value);
  }

  if (spec.dataset_path.empty()) {
    throw ConfigError("dataset", "missing required key 'dataset'");
  }
  if (!algorithm_set && eps_set) {
    // explicit epsilons with the default algorithm are fine; nothing to do
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config", e.what());
  }
  return spec;
}

nlohmann::json run_spec_manifest(const RunSpec& spec) {
  const TrainConfig& t = spec.train;
  return nlohmann::json{
      {"algorithm", std::string(to_string(t.objective.algorithm))},
      {"eps_low", t.objective.eps_low},
      {"eps_high", t.objective.eps_high},
      {"prompts_per_batch", t.prompts_per_batch},
      {"group_size", t.group_size},
      {"mini_batch", t.mini_batch},
      {"learning_rate", t.learning_rate},
      {"warmup_steps", t.warmup_steps},
      {"max_len", t.max_len},
      {"temperature", t.temperature},
      {"top_p", t.top_p},
      {"total_steps", t.total_steps},
      {"seed", t.rng_seed},
      {"num_states", t.num_states},
      {"context_order", t.context_order},
      {"init_scale", t.init_scale},
      {"eos_bias", t.eos_bias},
      {"l_buffer", t.l_buffer},
      {"penalty_scale", t.penalty_scale},
      {"beta1", t.adam.beta1},
      {"beta2", t.adam.beta2},
      {"adam_eps", t.adam.epsilon},
      {"weight_decay", t.adam.weight_decay},
      {"eval_every", t.eval_every},
      {"val_fraction", t.val_fraction},
      {"dataset", spec.dataset_path}};
}

}  // namespace rlvr
