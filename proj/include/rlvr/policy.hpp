#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlvr/types.hpp"

namespace rlvr {

// Tabular autoregressive categorical policy. Each row of `logits` holds the
// unnormalized log-distribution over the vocabulary for one context state; a
// context state hashes the query class together with the trailing
// `context_order` tokens into a row index. All probabilities are exact
// softmaxes of the row, so log-probabilities and their gradients are
// analytic.
struct PolicyParams {
  Matrix logits;          // (num_states, vocab_size)
  int vocab_size = 0;
  int context_order = 1;  // Markov order of the context window, 0 = unigram

  int num_states() const { return static_cast<int>(logits.rows()); }
  void validate() const;

  static PolicyParams uniform(int num_states, int vocab_size,
                              int context_order);
  static PolicyParams random(int num_states, int vocab_size, int context_order,
                             std::uint64_t seed, double scale);
};

/// Value-independent deep copy; mutating the original afterwards leaves the
/// snapshot untouched.
PolicyParams snapshot(const PolicyParams& params);

/// Stable hash of the prompt; queries with identical prompts share rows.
std::uint64_t query_class_id(const Query& query);

/// Row index reached after `context` (prompt followed by the response
/// prefix). Only the trailing `context_order` tokens enter the hash.
int context_state(const PolicyParams& params, const Query& query,
                  std::span<const TokenId> context);

double state_log_prob(const PolicyParams& params, int state, TokenId next,
                      double temperature = 1.0);

/// Full log-distribution of one row at the given temperature.
Vector state_log_probs(const PolicyParams& params, int state,
                       double temperature = 1.0);

double token_log_prob(const PolicyParams& params, const Query& query,
                      std::span<const TokenId> context, TokenId next,
                      double temperature = 1.0);

/// Sum of per-token log-probs at temperature 1 along the response.
double sequence_log_prob(const PolicyParams& params, const Query& query,
                         std::span<const TokenId> response);

struct SampleResult {
  TokenSeq tokens;
  Vector logprobs;          // full-softmax log-probs at the sampling
                            // temperature (not nucleus-renormalized)
  std::vector<int> states;  // context-state row visited at each position
};

// Autoregressive nucleus sampling. Stops after the end-of-sequence token or
// `max_len` tokens, whichever comes first; the terminating token is part of
// the returned sequence. Deterministic given `rng_seed`. If the nucleus ever
// comes out empty (pathological numerics), falls back to the argmax token.
SampleResult sample_response(const PolicyParams& params, const Query& query,
                             int max_len, double temperature, double top_p,
                             std::uint64_t rng_seed);

/// Argmax decoding, ties broken toward the lowest token id.
TokenSeq greedy_response(const PolicyParams& params, const Query& query,
                         int max_len);

// Gradient of log softmax w.r.t. the logit table: a single non-zero row with
// entry (1 - p_next) at `next` and -p_v elsewhere. Row entries sum to 0.
struct TokenLogProbGrad {
  int state = 0;
  Eigen::RowVectorXd row;
};

TokenLogProbGrad grad_token_log_prob(const PolicyParams& params,
                                     const Query& query,
                                     std::span<const TokenId> context,
                                     TokenId next);

/// Same row gradient at an explicit state and temperature:
/// (1{v = next} - p_v) / T.
Eigen::RowVectorXd state_grad_row(const PolicyParams& params, int state,
                                  TokenId next, double temperature = 1.0);

// Textual checkpoint format, stable across runs:
//   rlvr-policy-v1
//   vocab_size <int>
//   context_order <int>
//   num_states <int>
//   <num_states lines of vocab_size %.17g values>
void save_policy(const PolicyParams& params, const std::string& path);
PolicyParams load_policy(const std::string& path);

}  // namespace rlvr
