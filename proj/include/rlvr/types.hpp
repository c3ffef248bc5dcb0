#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rlvr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Reserved token ids sit at the top of the vocabulary. The policy itself only
// cares about the end-of-sequence id; the answer marker and prompt separator
// are conventions shared by the reward and synthetic-task modules. Payload
// (digit) tokens occupy ids [0, vocab_size - kReservedTokens), so a digit
// token's id is its value.
constexpr int kReservedTokens = 3;

constexpr TokenId eos_token(int vocab_size) { return vocab_size - 1; }
constexpr TokenId marker_token(int vocab_size) { return vocab_size - 2; }
constexpr TokenId sep_token(int vocab_size) { return vocab_size - 3; }

struct Query {
  std::int64_t id = 0;
  TokenSeq prompt_tokens;
  TokenSeq task_payload;  // verifier input, opaque to the policy
};

// A computation produced a non-finite value. Maps to exit code 2 in the CLI.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be read/written/parsed. Maps to exit code 3 in the CLI.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A run-config key is missing, unknown, or has an unparsable value.
struct ConfigError : std::runtime_error {
  ConfigError(std::string k, const std::string& what)
      : std::runtime_error(what), key(std::move(k)) {}
  std::string key;
};

}  // namespace rlvr
