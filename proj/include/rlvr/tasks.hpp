#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlvr/reward.hpp"
#include "rlvr/types.hpp"

namespace rlvr {

// Verifiable toy tasks whose correct responses may carry any amount of
// leading filler, so correctness is independent of response length by
// construction. Digit tokens are ids [0, vocab_size - 3); their id is their
// value, and the three reserved ids (separator, marker, end-of-sequence)
// occupy the top of the vocabulary.
enum class TaskKind { COPY_ANSWER, MODULAR_SUM };

std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view name);

struct TaskInstance {
  Query query;
  TokenSeq answer_tokens;
  int difficulty = 0;
  int vocab_size = 0;
};

struct Dataset {
  int vocab_size = 0;
  TaskKind kind = TaskKind::COPY_ANSWER;
  std::vector<TaskInstance> instances;
};

/// (sum of digit values) mod modulus.
TokenId modular_sum_answer(std::span<const TokenId> digits, int modulus);

// COPY_ANSWER prompts are [q, a, SEP] with answer [a]; MODULAR_SUM prompts
// are [d1, d2, d3, SEP] with answer [(d1+d2+d3) mod (vocab_size - 3)].
// Deterministic given the seed; answers are uniform over the digit space.
Dataset generate_dataset(TaskKind kind, int n, int vocab_size,
                         std::uint64_t rng_seed);

// Accepts iff the last answer marker is immediately followed by exactly the
// answer tokens and then the end of the response (or the end-of-sequence
// token). Everything before that marker is free filler, so only the tail of
// a response decides correctness and the acceptance probability of a random
// continuation carries no length preference in either direction.
bool free_length_verifier(const TaskInstance& instance,
                          std::span<const TokenId> response);

/// Wraps `free_length_verifier` for use as a reward verifier.
AnswerRule task_answer_rule(const TaskInstance& instance);

// Line-delimited text format shared with the reward fixtures:
//   rlvr-dataset-v1 vocab_size <int> task <kind>
//   <id> | <prompt tokens> | <answer tokens>
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace rlvr
