#include "rlvr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rlvr/rng.hpp"

namespace rlvr {

namespace {

void check_token(const PolicyParams& params, TokenId token) {
  if (token < 0 || token >= params.vocab_size) {
    throw std::invalid_argument("token id " + std::to_string(token) +
                                " outside vocabulary of size " +
                                std::to_string(params.vocab_size));
  }
}

}  // namespace

void PolicyParams::validate() const {
  if (vocab_size < 2) {
    throw std::invalid_argument("vocab_size must be at least 2");
  }
  if (context_order < 0) {
    throw std::invalid_argument("context_order must be non-negative");
  }
  if (logits.rows() < 1 || logits.cols() != vocab_size) {
    throw std::invalid_argument("logit table shape does not match vocab_size");
  }
  if (!logits.allFinite()) {
    throw std::invalid_argument("logit table contains non-finite entries");
  }
}

PolicyParams PolicyParams::uniform(int num_states, int vocab_size,
                                   int context_order) {
  PolicyParams p;
  p.logits = Matrix::Zero(num_states, vocab_size);
  p.vocab_size = vocab_size;
  p.context_order = context_order;
  p.validate();
  return p;
}

PolicyParams PolicyParams::random(int num_states, int vocab_size,
                                  int context_order, std::uint64_t seed,
                                  double scale) {
  PolicyParams p = uniform(num_states, vocab_size, context_order);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < p.logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.logits.cols(); ++c) {
      p.logits(r, c) = scale * rng.normal();
    }
  }
  return p;
}

PolicyParams snapshot(const PolicyParams& params) { return params; }

std::uint64_t query_class_id(const Query& query) {
  return fnv1a64(query.prompt_tokens);
}

int context_state(const PolicyParams& params, const Query& query,
                  std::span<const TokenId> context) {
  const auto take = std::min<std::size_t>(
      static_cast<std::size_t>(params.context_order), context.size());
  std::uint64_t h = hash_combine(query_class_id(query), take);
  for (std::size_t i = context.size() - take; i < context.size(); ++i) {
    h = hash_combine(h, static_cast<std::uint32_t>(context[i]));
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(params.num_states()));
}

Vector state_log_probs(const PolicyParams& params, int state,
                       double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  if (state < 0 || state >= params.num_states()) {
    throw std::invalid_argument("context state out of range");
  }
  Vector z = params.logits.row(state).transpose() / temperature;
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return z.array() - lse;
}

double state_log_prob(const PolicyParams& params, int state, TokenId next,
                      double temperature) {
  check_token(params, next);
  return state_log_probs(params, state, temperature)(next);
}

double token_log_prob(const PolicyParams& params, const Query& query,
                      std::span<const TokenId> context, TokenId next,
                      double temperature) {
  const int s = context_state(params, query, context);
  return state_log_prob(params, s, next, temperature);
}

double sequence_log_prob(const PolicyParams& params, const Query& query,
                         std::span<const TokenId> response) {
  if (response.empty()) {
    throw std::invalid_argument("response must be non-empty");
  }
  const TokenId eos = eos_token(params.vocab_size);
  TokenSeq ctx = query.prompt_tokens;
  ctx.reserve(ctx.size() + response.size());
  double total = 0.0;
  for (std::size_t t = 0; t < response.size(); ++t) {
    check_token(params, response[t]);
    if (t > 0 && response[t - 1] == eos) {
      throw std::invalid_argument("response continues past end-of-sequence");
    }
    const int s = context_state(params, query, ctx);
    total += state_log_prob(params, s, response[t]);
    ctx.push_back(response[t]);
  }
  return total;
}

namespace {

// Nucleus draw from one row. `logp` is the full log-distribution at the
// sampling temperature; the smallest prefix of tokens (by descending
// probability, id ascending on ties) whose mass reaches top_p forms the
// nucleus.
TokenId sample_from_row(const Vector& logp, double top_p, Rng& rng) {
  const int n = static_cast<int>(logp.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (logp(a) != logp(b)) return logp(a) > logp(b);
    return a < b;
  });

  double mass = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    mass += std::exp(logp(order[i]));
    ++count;
    if (mass >= top_p) break;
  }
  if (count == 0 || !(mass > 0.0) || !std::isfinite(mass)) {
    return static_cast<TokenId>(order.empty() ? 0 : order[0]);  // argmax
  }

  const double u = rng.uniform01() * mass;
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    acc += std::exp(logp(order[i]));
    if (u < acc) return static_cast<TokenId>(order[i]);
  }
  return static_cast<TokenId>(order[count - 1]);
}

}  // namespace

SampleResult sample_response(const PolicyParams& params, const Query& query,
                             int max_len, double temperature, double top_p,
                             std::uint64_t rng_seed) {
  if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw std::invalid_argument("top_p must lie in (0, 1]");
  }
  if (query.prompt_tokens.empty()) {
    throw std::invalid_argument("query prompt must be non-empty");
  }

  Rng rng(rng_seed);
  const TokenId eos = eos_token(params.vocab_size);
  TokenSeq ctx = query.prompt_tokens;
  ctx.reserve(ctx.size() + static_cast<std::size_t>(max_len));

  SampleResult res;
  std::vector<double> logprobs;
  for (int t = 0; t < max_len; ++t) {
    const int s = context_state(params, query, ctx);
    const Vector logp = state_log_probs(params, s, temperature);
    const TokenId tok = sample_from_row(logp, top_p, rng);
    res.tokens.push_back(tok);
    res.states.push_back(s);
    logprobs.push_back(logp(tok));
    ctx.push_back(tok);
    if (tok == eos) break;
  }
  res.logprobs = Eigen::Map<const Vector>(logprobs.data(),
                                          static_cast<Eigen::Index>(
                                              logprobs.size()));
  return res;
}

TokenSeq greedy_response(const PolicyParams& params, const Query& query,
                         int max_len) {
  if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  const TokenId eos = eos_token(params.vocab_size);
  TokenSeq ctx = query.prompt_tokens;
  TokenSeq out;
  for (int t = 0; t < max_len; ++t) {
    const int s = context_state(params, query, ctx);
    Eigen::Index best = 0;
    params.logits.row(s).maxCoeff(&best);
    const auto tok = static_cast<TokenId>(best);
    out.push_back(tok);
    ctx.push_back(tok);
    if (tok == eos) break;
  }
  return out;
}

Eigen::RowVectorXd state_grad_row(const PolicyParams& params, int state,
                                  TokenId next, double temperature) {
  check_token(params, next);
  const Vector logp = state_log_probs(params, state, temperature);
  Eigen::RowVectorXd row = -logp.array().exp().transpose() / temperature;
  row(next) += 1.0 / temperature;
  return row;
}

TokenLogProbGrad grad_token_log_prob(const PolicyParams& params,
                                     const Query& query,
                                     std::span<const TokenId> context,
                                     TokenId next) {
  TokenLogProbGrad g;
  g.state = context_state(params, query, context);
  g.row = state_grad_row(params, g.state, next, 1.0);
  return g;
}

void save_policy(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open policy file for writing: " + path);
  out << "rlvr-policy-v1\n";
  out << "vocab_size " << params.vocab_size << "\n";
  out << "context_order " << params.context_order << "\n";
  out << "num_states " << params.num_states() << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < params.logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.logits.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", params.logits(r, c));
      out << buf << (c + 1 == params.logits.cols() ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "rlvr-policy-v1") {
    throw IoError("bad policy file header in " + path);
  }
  auto read_field = [&](const std::string& name) {
    std::string key;
    long long value = 0;
    if (!(in >> key >> value) || key != name) {
      throw IoError("malformed policy header field '" + name + "' in " + path);
    }
    return value;
  };
  PolicyParams p;
  p.vocab_size = static_cast<int>(read_field("vocab_size"));
  p.context_order = static_cast<int>(read_field("context_order"));
  const auto rows = static_cast<Eigen::Index>(read_field("num_states"));
  if (rows < 1 || p.vocab_size < 2) {
    throw IoError("invalid policy dimensions in " + path);
  }
  p.logits.resize(rows, p.vocab_size);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < p.vocab_size; ++c) {
      if (!(in >> p.logits(r, c))) {
        throw IoError("truncated logit table in " + path);
      }
    }
  }
  p.validate();
  return p;
}

}  // namespace rlvr
