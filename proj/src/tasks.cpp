#include "rlvr/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rlvr/rng.hpp"

namespace rlvr {

std::string_view to_string(TaskKind k) {
  return k == TaskKind::COPY_ANSWER ? "copy_answer" : "modular_sum";
}

std::optional<TaskKind> parse_task_kind(std::string_view name) {
  if (name == "copy_answer") return TaskKind::COPY_ANSWER;
  if (name == "modular_sum") return TaskKind::MODULAR_SUM;
  return std::nullopt;
}

TokenId modular_sum_answer(std::span<const TokenId> digits, int modulus) {
  if (modulus < 2) throw std::invalid_argument("modulus must be at least 2");
  long long sum = 0;
  for (TokenId d : digits) {
    if (d < 0 || d >= modulus) {
      throw std::invalid_argument("digit outside [0, modulus)");
    }
    sum += d;
  }
  return static_cast<TokenId>(sum % modulus);
}

Dataset generate_dataset(TaskKind kind, int n, int vocab_size,
                         std::uint64_t rng_seed) {
  if (n <= 0) throw std::invalid_argument("dataset size must be positive");
  const int modulus = vocab_size - kReservedTokens;
  if (modulus < 2) {
    throw std::invalid_argument(
        "vocab_size too small to encode answers (need at least 5)");
  }

  Dataset ds;
  ds.vocab_size = vocab_size;
  ds.kind = kind;
  Rng rng(rng_seed);
  const TokenId sep = sep_token(vocab_size);
  for (int i = 0; i < n; ++i) {
    TaskInstance inst;
    inst.vocab_size = vocab_size;
    inst.query.id = i;
    if (kind == TaskKind::COPY_ANSWER) {
      const auto q = static_cast<TokenId>(rng.uniform_below(modulus));
      const auto a = static_cast<TokenId>(rng.uniform_below(modulus));
      inst.query.prompt_tokens = {q, a, sep};
      inst.answer_tokens = {a};
      inst.difficulty = 0;
    } else {
      TokenSeq digits(3);
      for (TokenId& d : digits) {
        d = static_cast<TokenId>(rng.uniform_below(modulus));
      }
      inst.query.prompt_tokens = digits;
      inst.query.prompt_tokens.push_back(sep);
      inst.answer_tokens = {modular_sum_answer(digits, modulus)};
      inst.difficulty = 1;
    }
    inst.query.task_payload = inst.answer_tokens;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

bool free_length_verifier(const TaskInstance& instance,
                          std::span<const TokenId> response) {
  const TokenId mark = marker_token(instance.vocab_size);
  const TokenId eos = eos_token(instance.vocab_size);
  const auto rit = std::find(response.rbegin(), response.rend(), mark);
  if (rit == response.rend()) return false;
  const auto pos = static_cast<std::size_t>(response.rend() - rit);
  const TokenSeq& ans = instance.answer_tokens;
  if (pos + ans.size() > response.size()) return false;
  if (!std::equal(ans.begin(), ans.end(), response.begin() + pos)) {
    return false;
  }
  const std::size_t tail = pos + ans.size();
  return tail == response.size() || response[tail] == eos;
}

AnswerRule task_answer_rule(const TaskInstance& instance) {
  return [instance](const Query&, std::span<const TokenId> response) {
    return free_length_verifier(instance, response);
  };
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  out << "rlvr-dataset-v1 vocab_size " << dataset.vocab_size << " task "
      << to_string(dataset.kind) << "\n";
  for (const TaskInstance& inst : dataset.instances) {
    out << inst.query.id << " |";
    for (TokenId t : inst.query.prompt_tokens) out << ' ' << t;
    out << " |";
    for (TokenId t : inst.answer_tokens) out << ' ' << t;
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
  std::istringstream header(line);
  std::string magic, vkey, tkey, tname;
  int vocab = 0;
  if (!(header >> magic >> vkey >> vocab >> tkey >> tname) ||
      magic != "rlvr-dataset-v1" || vkey != "vocab_size" || tkey != "task") {
    throw IoError("bad dataset header in " + path);
  }
  const auto kind = parse_task_kind(tname);
  if (!kind) throw IoError("unknown task kind '" + tname + "' in " + path);

  Dataset ds;
  ds.vocab_size = vocab;
  ds.kind = *kind;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream rec(line);
    TaskInstance inst;
    inst.vocab_size = vocab;
    inst.difficulty = ds.kind == TaskKind::MODULAR_SUM ? 1 : 0;
    std::string bar;
    if (!(rec >> inst.query.id >> bar) || bar != "|") {
      throw IoError("malformed dataset record at " + path + ":" +
                    std::to_string(lineno));
    }
    std::string tok;
    bool in_prompt = true;
    while (rec >> tok) {
      if (tok == "|") {
        if (!in_prompt) {
          throw IoError("malformed dataset record at " + path + ":" +
                        std::to_string(lineno));
        }
        in_prompt = false;
        continue;
      }
      TokenId id = 0;
      try {
        id = static_cast<TokenId>(std::stol(tok));
      } catch (const std::exception&) {
        throw IoError("bad token at " + path + ":" + std::to_string(lineno));
      }
      (in_prompt ? inst.query.prompt_tokens : inst.answer_tokens).push_back(id);
    }
    if (in_prompt || inst.query.prompt_tokens.empty() ||
        inst.answer_tokens.empty()) {
      throw IoError("incomplete dataset record at " + path + ":" +
                    std::to_string(lineno));
    }
    inst.query.task_payload = inst.answer_tokens;
    ds.instances.push_back(std::move(inst));
  }
  if (ds.instances.empty()) throw IoError("dataset has no records: " + path);
  return ds;
}

}  // namespace rlvr
