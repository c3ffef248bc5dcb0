#include <doctest.h>

#include <filesystem>

#include "rlvr/tasks.hpp"

using namespace rlvr;

namespace {

// Brute-force acceptance oracle: last marker, then exactly the answer, then
// end-of-response or EOS.
bool oracle_accepts(const TokenSeq& r, const TokenSeq& ans, TokenId mark,
                    TokenId eos) {
  std::size_t i = r.size();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] == mark) i = k;
  }
  if (i == r.size()) return false;
  std::size_t j = i + 1;
  for (TokenId a : ans) {
    if (j >= r.size() || r[j] != a) return false;
    ++j;
  }
  return j == r.size() || r[j] == eos;
}

}  // namespace

TEST_CASE("modular sum arithmetic") {
  CHECK(modular_sum_answer(TokenSeq{3, 4}, 10) == 7);
  CHECK(modular_sum_answer(TokenSeq{9, 9, 9}, 10) == 7);
  CHECK(modular_sum_answer(TokenSeq{0, 0}, 10) == 0);
  CHECK_THROWS_AS(modular_sum_answer(TokenSeq{11}, 10), std::invalid_argument);
}

TEST_CASE("dataset generation") {
  SUBCASE("copy task construction") {
    const Dataset ds = generate_dataset(TaskKind::COPY_ANSWER, 32, 13, 1);
    CHECK(ds.vocab_size == 13);
    for (const TaskInstance& inst : ds.instances) {
      REQUIRE(inst.query.prompt_tokens.size() == 3);
      CHECK(inst.query.prompt_tokens[2] == sep_token(13));
      REQUIRE(inst.answer_tokens.size() == 1);
      CHECK(inst.answer_tokens[0] == inst.query.prompt_tokens[1]);
      CHECK(inst.difficulty == 0);
    }
  }

  SUBCASE("modular sum construction") {
    const Dataset ds = generate_dataset(TaskKind::MODULAR_SUM, 32, 13, 1);
    for (const TaskInstance& inst : ds.instances) {
      REQUIRE(inst.query.prompt_tokens.size() == 4);
      const TokenSeq digits(inst.query.prompt_tokens.begin(),
                            inst.query.prompt_tokens.end() - 1);
      CHECK(inst.answer_tokens[0] == modular_sum_answer(digits, 10));
      CHECK(inst.difficulty == 1);
    }
  }

  SUBCASE("deterministic given the seed") {
    const Dataset a = generate_dataset(TaskKind::MODULAR_SUM, 64, 13, 9);
    const Dataset b = generate_dataset(TaskKind::MODULAR_SUM, 64, 13, 9);
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      CHECK(a.instances[i].query.prompt_tokens ==
            b.instances[i].query.prompt_tokens);
      CHECK(a.instances[i].answer_tokens == b.instances[i].answer_tokens);
    }
  }

  SUBCASE("answers roughly uniform over the digit space") {
    const Dataset ds = generate_dataset(TaskKind::MODULAR_SUM, 10000, 13, 3);
    std::vector<int> counts(10, 0);
    for (const TaskInstance& inst : ds.instances) {
      counts[static_cast<std::size_t>(inst.answer_tokens[0])]++;
    }
    for (int c : counts) {
      CHECK(c > 850);
      CHECK(c < 1150);
    }
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(generate_dataset(TaskKind::COPY_ANSWER, 0, 13, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(TaskKind::COPY_ANSWER, 4, 4, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("free-length verifier") {
  TaskInstance inst;
  inst.vocab_size = 13;
  inst.answer_tokens = {4};
  const TokenId mark = marker_token(13);
  const TokenId eos = eos_token(13);

  CHECK(free_length_verifier(inst, TokenSeq{1, 2, 3, mark, 4, eos}));
  CHECK(free_length_verifier(inst, TokenSeq{mark, 4, eos}));
  CHECK(free_length_verifier(inst, TokenSeq{mark, 4}));  // truncated run
  CHECK(free_length_verifier(inst, TokenSeq{mark, 5, mark, 4, eos}));
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{mark, 5, eos}));
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{4, eos}));
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{mark, 4, 7, eos}));
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{mark, eos}));
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{4, mark}));
  // the last marker decides: an earlier correct pattern does not count
  CHECK_FALSE(free_length_verifier(inst, TokenSeq{mark, 4, mark, 5, eos}));
}

TEST_CASE("correctness is independent of filler length") {
  // vocab 5: digits {0, 1}, SEP=2, MARK=3, EOS=4
  TaskInstance inst;
  inst.vocab_size = 5;
  inst.answer_tokens = {1};
  const TokenId mark = marker_token(5);
  const TokenId eos = eos_token(5);

  // exhaustive enumeration of every response of length <= 6
  std::vector<TokenSeq> all{{}};
  std::size_t accepted_total = 0;
  for (int len = 1; len <= 6; ++len) {
    std::vector<TokenSeq> next;
    for (const TokenSeq& prefix : all) {
      if (static_cast<int>(prefix.size()) != len - 1) continue;
      for (TokenId t = 0; t < 5; ++t) {
        TokenSeq r = prefix;
        r.push_back(t);
        CHECK(free_length_verifier(inst, r) ==
              oracle_accepts(r, inst.answer_tokens, mark, eos));
        if (free_length_verifier(inst, r)) ++accepted_total;
        next.push_back(std::move(r));
      }
    }
    all.insert(all.end(), next.begin(), next.end());
  }
  CHECK(accepted_total > 0);

  // every filler prefix of non-marker tokens yields an accepted response,
  // so the acceptance rate of the canonical suffix is 1 at every length
  for (int f = 0; f <= 3; ++f) {
    std::vector<TokenSeq> fillers{{}};
    for (int k = 0; k < f; ++k) {
      std::vector<TokenSeq> grown;
      for (const TokenSeq& base : fillers) {
        for (TokenId t = 0; t < 5; ++t) {
          if (t == mark) continue;
          TokenSeq g = base;
          g.push_back(t);
          grown.push_back(std::move(g));
        }
      }
      fillers = std::move(grown);
    }
    for (const TokenSeq& filler : fillers) {
      TokenSeq r = filler;
      r.push_back(mark);
      r.push_back(1);
      r.push_back(eos);
      CHECK(free_length_verifier(inst, r));
    }
  }
}

TEST_CASE("dataset files round-trip") {
  const Dataset ds = generate_dataset(TaskKind::MODULAR_SUM, 16, 13, 5);
  const auto path =
      (std::filesystem::temp_directory_path() / "rlvr_dataset_test.txt")
          .string();
  save_dataset(ds, path);
  const Dataset r = load_dataset(path);
  CHECK(r.vocab_size == ds.vocab_size);
  CHECK(r.kind == ds.kind);
  REQUIRE(r.instances.size() == ds.instances.size());
  for (std::size_t i = 0; i < r.instances.size(); ++i) {
    CHECK(r.instances[i].query.id == ds.instances[i].query.id);
    CHECK(r.instances[i].query.prompt_tokens ==
          ds.instances[i].query.prompt_tokens);
    CHECK(r.instances[i].answer_tokens == ds.instances[i].answer_tokens);
    CHECK(r.instances[i].vocab_size == ds.instances[i].vocab_size);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_dataset("/nonexistent/data.txt"), IoError);
}
