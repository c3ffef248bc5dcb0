#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rlvr/policy.hpp"
#include "rlvr/rng.hpp"
#include "oracles.hpp"

using namespace rlvr;

namespace {

Query make_query(TokenSeq prompt) {
  Query q;
  q.prompt_tokens = std::move(prompt);
  return q;
}

}  // namespace

TEST_CASE("token log-prob matches softmax identities") {
  PolicyParams p = PolicyParams::uniform(4, 4, 1);
  const Query q = make_query({0});

  SUBCASE("uniform logits give log(1/vocab)") {
    for (TokenId t = 0; t < 4; ++t) {
      CHECK(token_log_prob(p, q, q.prompt_tokens, t) ==
            doctest::Approx(-1.3862943611198906).epsilon(1e-15));
    }
  }

  SUBCASE("peaked row: log(e / (e + 3))") {
    p.logits(context_state(p, q, q.prompt_tokens), 0) = 1.0;
    CHECK(token_log_prob(p, q, q.prompt_tokens, 0) ==
          doctest::Approx(-0.7436683806286791).epsilon(1e-14));
  }

  SUBCASE("exponentials sum to one for every state") {
    PolicyParams r = PolicyParams::random(6, 5, 1, 99, 2.0);
    for (int s = 0; s < r.num_states(); ++s) {
      for (double temp : {1.0, 0.5, 3.0}) {
        double sum = 0.0;
        for (TokenId t = 0; t < r.vocab_size; ++t) {
          sum += std::exp(state_log_prob(r, s, t, temp));
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
      }
    }
  }

  SUBCASE("temperature agrees with the naive oracle") {
    PolicyParams r = PolicyParams::random(3, 6, 1, 7, 1.5);
    for (int s = 0; s < 3; ++s) {
      std::vector<double> row(static_cast<std::size_t>(r.vocab_size));
      for (int c = 0; c < r.vocab_size; ++c) row[static_cast<std::size_t>(c)] = r.logits(s, c);
      for (TokenId t = 0; t < r.vocab_size; ++t) {
        CHECK(state_log_prob(r, s, t, 0.7) ==
              doctest::Approx(oracle::log_softmax(row, t, 0.7))
                  .epsilon(1e-13));
      }
    }
  }

  SUBCASE("invalid token id is a domain error") {
    CHECK_THROWS_AS(token_log_prob(p, q, q.prompt_tokens, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(token_log_prob(p, q, q.prompt_tokens, -1),
                    std::invalid_argument);
    CHECK_THROWS_AS(token_log_prob(p, q, q.prompt_tokens, 0, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("sequence log-prob decomposes over tokens") {
  const Query q = make_query({1, 2});

  SUBCASE("uniform logits, length 3") {
    PolicyParams p = PolicyParams::uniform(8, 4, 1);
    const TokenSeq resp{0, 1, 2};
    CHECK(sequence_log_prob(p, q, resp) ==
          doctest::Approx(3.0 * std::log(0.25)).epsilon(1e-15));
  }

  SUBCASE("single token equals token_log_prob") {
    PolicyParams p = PolicyParams::random(8, 4, 1, 3, 1.0);
    const TokenSeq resp{2};
    CHECK(sequence_log_prob(p, q, resp) ==
          token_log_prob(p, q, q.prompt_tokens, 2));
  }

  SUBCASE("length 5 equals the sum of stepwise calls") {
    PolicyParams p = PolicyParams::random(16, 4, 2, 11, 1.0);
    const TokenSeq resp{0, 2, 1, 1, 3};
    double expected = 0.0;
    TokenSeq ctx = q.prompt_tokens;
    for (TokenId t : resp) {
      expected += token_log_prob(p, q, ctx, t);
      ctx.push_back(t);
    }
    CHECK(std::abs(sequence_log_prob(p, q, resp) - expected) < 1e-14);
  }

  SUBCASE("empty response is a domain error") {
    PolicyParams p = PolicyParams::uniform(8, 4, 1);
    CHECK_THROWS_AS(sequence_log_prob(p, q, TokenSeq{}),
                    std::invalid_argument);
  }

  SUBCASE("tokens after the end-of-sequence token are rejected") {
    PolicyParams p = PolicyParams::uniform(8, 4, 1);
    const TokenSeq resp{0, 3, 1};  // 3 is EOS for vocab 4
    CHECK_THROWS_AS(sequence_log_prob(p, q, resp), std::invalid_argument);
  }
}

TEST_CASE("sampling") {
  const Query q = make_query({0, 1});

  SUBCASE("deterministic given the seed") {
    PolicyParams p = PolicyParams::random(32, 6, 1, 17, 1.0);
    const SampleResult a = sample_response(p, q, 20, 1.0, 0.7, 1234);
    const SampleResult b = sample_response(p, q, 20, 1.0, 0.7, 1234);
    CHECK(a.tokens == b.tokens);
    CHECK(a.states == b.states);
    CHECK((a.logprobs - b.logprobs).norm() == 0.0);
  }

  SUBCASE("probability-one end-of-sequence gives a length-1 response") {
    PolicyParams p = PolicyParams::uniform(4, 5, 1);
    p.logits.col(eos_token(5)).setConstant(50.0);
    const SampleResult s = sample_response(p, q, 16, 1.0, 1.0, 0);
    REQUIRE(s.tokens.size() == 1);
    CHECK(s.tokens[0] == eos_token(5));
  }

  SUBCASE("first-token frequency matches the softmax") {
    // vocab 2, logits [1, 0]: P(token 0) = e / (e + 1)
    PolicyParams p = PolicyParams::uniform(2, 2, 1);
    p.logits.col(0).setConstant(1.0);
    int count0 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const SampleResult s = sample_response(p, q, 4, 1.0, 1.0,
                                             static_cast<std::uint64_t>(i));
      if (s.tokens[0] == 0) ++count0;
    }
    const double freq = static_cast<double>(count0) / n;
    CHECK(std::abs(freq - 0.7310585786300049) < 0.01);
  }

  SUBCASE("nucleus truncation never samples outside the nucleus") {
    PolicyParams p = PolicyParams::uniform(4, 4, 0);
    p.logits.row(context_state(p, q, q.prompt_tokens)) << 5.0, 4.9, 0.0, 0.0;
    // the top token alone carries ~52% of the mass, so top_p=0.5 pins it
    for (int i = 0; i < 200; ++i) {
      const SampleResult s = sample_response(p, q, 1, 1.0, 0.5,
                                             static_cast<std::uint64_t>(i));
      CHECK(s.tokens[0] == 0);
    }
  }

  SUBCASE("returned log-probs are the full softmax, not renormalized") {
    PolicyParams p = PolicyParams::random(8, 6, 1, 5, 1.5);
    const SampleResult s = sample_response(p, q, 10, 0.8, 0.3, 42);
    TokenSeq ctx = q.prompt_tokens;
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      CHECK(s.logprobs(static_cast<Eigen::Index>(t)) ==
            token_log_prob(p, q, ctx, s.tokens[t], 0.8));
      ctx.push_back(s.tokens[t]);
    }
  }
}

TEST_CASE("log-prob gradient") {
  const Query q = make_query({2});

  SUBCASE("uniform logits, vocab 4, next=2") {
    PolicyParams p = PolicyParams::uniform(4, 4, 1);
    const TokenLogProbGrad g = grad_token_log_prob(p, q, q.prompt_tokens, 2);
    CHECK(g.row(0) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(g.row(1) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(g.row(2) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(g.row(3) == doctest::Approx(-0.25).epsilon(1e-15));
  }

  SUBCASE("saturated softmax has a vanishing gradient row") {
    PolicyParams p = PolicyParams::uniform(4, 4, 1);
    const int s = context_state(p, q, q.prompt_tokens);
    p.logits(s, 1) = 60.0;
    const TokenLogProbGrad g = grad_token_log_prob(p, q, q.prompt_tokens, 1);
    CHECK(g.row.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("row entries sum to zero") {
    PolicyParams p = PolicyParams::random(8, 5, 1, 21, 2.0);
    for (TokenId t = 0; t < p.vocab_size; ++t) {
      const TokenLogProbGrad g = grad_token_log_prob(p, q, q.prompt_tokens, t);
      CHECK(std::abs(g.row.sum()) < 1e-12);
    }
  }

  SUBCASE("matches central finite differences on 100 random triples") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      PolicyParams p = PolicyParams::random(
          6, 5, 1, derive_seed(100, static_cast<std::uint64_t>(trial)), 1.5);
      const Query rq = make_query(
          {static_cast<TokenId>(rng.uniform_below(5)),
           static_cast<TokenId>(rng.uniform_below(5))});
      const auto next = static_cast<TokenId>(rng.uniform_below(5));
      const TokenLogProbGrad g =
          grad_token_log_prob(p, rq, rq.prompt_tokens, next);
      const double h = 1e-6;
      Eigen::RowVectorXd fd(p.vocab_size);
      for (int c = 0; c < p.vocab_size; ++c) {
        const double saved = p.logits(g.state, c);
        p.logits(g.state, c) = saved + h;
        const double up = token_log_prob(p, rq, rq.prompt_tokens, next);
        p.logits(g.state, c) = saved - h;
        const double down = token_log_prob(p, rq, rq.prompt_tokens, next);
        p.logits(g.state, c) = saved;
        fd(c) = (up - down) / (2.0 * h);
      }
      const double den = std::max(g.row.norm(), fd.norm());
      REQUIRE(den > 0.0);
      CHECK((g.row - fd).norm() / den < 1e-6);
    }
  }
}

TEST_CASE("snapshot is a value-independent deep copy") {
  PolicyParams p = PolicyParams::random(8, 4, 1, 13, 1.0);
  const Query q = make_query({1});
  const TokenSeq resp{0, 2, 3};
  const double before = sequence_log_prob(p, q, resp);

  PolicyParams snap = snapshot(p);
  CHECK(snap.logits == p.logits);

  p.logits.array() += 5.0;
  CHECK(sequence_log_prob(snap, q, resp) == before);
  CHECK(sequence_log_prob(p, q, resp) != before);
}

TEST_CASE("checkpoint round-trips exactly") {
  PolicyParams p = PolicyParams::random(12, 5, 2, 31, 3.0);
  const auto path =
      (std::filesystem::temp_directory_path() / "rlvr_policy_test.txt")
          .string();
  save_policy(p, path);
  const PolicyParams r = load_policy(path);
  CHECK(r.vocab_size == p.vocab_size);
  CHECK(r.context_order == p.context_order);
  CHECK(r.logits == p.logits);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_policy("/nonexistent/policy.txt"), IoError);
}

TEST_CASE("context states") {
  PolicyParams p = PolicyParams::uniform(64, 5, 1);
  const Query a = make_query({1, 2});
  const Query b = make_query({2, 1});

  // order 1: only the last context token and the query class matter
  const TokenSeq c1{3, 0};
  const TokenSeq c2{1, 0};
  CHECK(context_state(p, a, c1) == context_state(p, a, c2));
  CHECK(context_state(p, a, c1) != context_state(p, b, c1));

  // order 0 collapses to one state per query class
  PolicyParams u = PolicyParams::uniform(64, 5, 0);
  CHECK(context_state(u, a, c1) == context_state(u, a, TokenSeq{0, 3}));
}
