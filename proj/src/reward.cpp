#include "rlvr/reward.hpp"

#include <algorithm>

namespace rlvr {

void LengthPenaltyConfig::validate() const {
  if (l_max <= 0 || l_buffer <= 0) {
    throw std::invalid_argument("length penalty bounds must be positive");
  }
  if (l_buffer >= l_max) {
    throw std::invalid_argument("l_buffer must be smaller than l_max");
  }
  if (!(penalty_scale >= 0.0)) {
    throw std::invalid_argument("penalty_scale must be non-negative");
  }
}

double accuracy_reward(const Query& query, std::span<const TokenId> response,
                       const AnswerRule& verifier) {
  if (!verifier) {
    throw std::invalid_argument("no verifier defined for this query");
  }
  return verifier(query, response) ? 1.0 : 0.0;
}

double format_reward(std::span<const TokenId> response,
                     const FormatRule& format_rule) {
  if (!format_rule) {
    throw std::invalid_argument("no format rule defined");
  }
  return format_rule(response) ? 0.5 : 0.0;
}

double overlong_reward(std::int64_t length, const LengthPenaltyConfig& cfg) {
  cfg.validate();
  if (length < 0) throw std::invalid_argument("length must be non-negative");
  if (length > cfg.l_max) {
    throw std::invalid_argument("length exceeds l_max; truncate at l_max");
  }
  const double over =
      static_cast<double>((cfg.l_max - cfg.l_buffer) - length) /
      static_cast<double>(cfg.l_buffer) * cfg.penalty_scale;
  return std::min(0.0, over);
}

RewardBreakdown total_reward(const Query& query,
                             std::span<const TokenId> response,
                             const LengthPenaltyConfig& cfg,
                             const AnswerRule& verifier,
                             const FormatRule& format_rule) {
  RewardBreakdown r;
  r.accuracy = accuracy_reward(query, response, verifier);
  r.format = format_reward(response, format_rule);
  r.overlong = overlong_reward(static_cast<std::int64_t>(response.size()), cfg);
  r.total = r.accuracy + r.format + r.overlong;
  return r;
}

FormatRule single_marker_format_rule(int vocab_size) {
  const TokenId mark = marker_token(vocab_size);
  const TokenId eos = eos_token(vocab_size);
  return [mark, eos](std::span<const TokenId> response) {
    const auto marks = std::count(response.begin(), response.end(), mark);
    if (marks != 1) return false;
    const auto eos_it = std::find(response.begin(), response.end(), eos);
    if (eos_it == response.end()) return false;
    const auto mark_it = std::find(response.begin(), response.end(), mark);
    return mark_it < eos_it;
  };
}

}  // namespace rlvr
