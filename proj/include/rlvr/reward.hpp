#pragma once

#include <functional>
#include <span>

#include "rlvr/types.hpp"

namespace rlvr {

// Composite verifiable reward: accuracy in {0, 1}, format in {0, 0.5}, and a
// soft length penalty in [-penalty_scale, 0] that activates over the final
// l_buffer tokens before the generation cap. total is always the exact sum
// of the three parts.
struct RewardBreakdown {
  double accuracy = 0.0;
  double format = 0.0;
  double overlong = 0.0;
  double total = 0.0;
};

struct LengthPenaltyConfig {
  int l_max = 256;
  int l_buffer = 32;
  double penalty_scale = 0.3;

  void validate() const;
};

using AnswerRule = std::function<bool(const Query&, std::span<const TokenId>)>;
using FormatRule = std::function<bool(std::span<const TokenId>)>;

/// 1.0 iff the verifier accepts the response; an unextractable answer is a
/// plain 0.0, not an error.
double accuracy_reward(const Query& query, std::span<const TokenId> response,
                       const AnswerRule& verifier);

/// 0.5 iff the structural predicate holds.
double format_reward(std::span<const TokenId> response,
                     const FormatRule& format_rule);

// min{0, ((l_max - l_buffer) - length) / l_buffer * penalty_scale}.
// Zero up to l_max - l_buffer, then linear down to -penalty_scale at l_max.
// Lengths beyond l_max are a caller error: generation must truncate there.
double overlong_reward(std::int64_t length, const LengthPenaltyConfig& cfg);

RewardBreakdown total_reward(const Query& query,
                             std::span<const TokenId> response,
                             const LengthPenaltyConfig& cfg,
                             const AnswerRule& verifier,
                             const FormatRule& format_rule);

/// Structural predicate for the synthetic tasks: the answer marker appears
/// exactly once and precedes the (required) end-of-sequence token.
FormatRule single_marker_format_rule(int vocab_size);

}  // namespace rlvr
