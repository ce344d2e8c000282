// Copyright 2026 The pptok Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pptok/ngram.hpp"

#include "pptok/errors.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace pptok {

std::string to_string(const SmoothingSpec& s) {
  std::ostringstream os;
  os << (s.kind == Smoothing::add_k ? "add_k(" : "kneser_ney(") << s.param << ')';
  return os.str();
}

NGramModel NGramModel::train(std::span<const std::vector<int>> corpus, int num_tokens,
                             int order, SmoothingSpec smoothing, std::uint64_t seed) {
  if (corpus.empty()) throw EmptyCorpus("no training sequences");
  if (order < 1) throw ConfigError("order must be at least 1");
  if (num_tokens < 1) throw ConfigError("num_tokens must be at least 1");
  if (smoothing.kind == Smoothing::add_k && !(smoothing.param >= 0.0))
    throw ConfigError("add_k needs k >= 0");
  if (smoothing.kind == Smoothing::kneser_ney &&
      !(smoothing.param > 0.0 && smoothing.param <= 1.0))
    throw ConfigError("Kneser-Ney discount must lie in (0, 1]");

  NGramModel m;
  m.order_ = order;
  m.num_tokens_ = num_tokens;
  m.smoothing_ = smoothing;
  m.seed_ = seed;

  std::vector<int> padded;
  for (const auto& seq : corpus) {
    padded.assign(static_cast<std::size_t>(order - 1), m.bos());
    for (int tok : seq) {
      m.check_token(tok);
      padded.push_back(tok);
    }
    padded.push_back(m.eos());
    for (std::size_t end = static_cast<std::size_t>(order); end <= padded.size(); ++end)
      ++m.ngrams_[std::vector<int>(padded.begin() + std::ptrdiff_t(end) - order,
                                   padded.begin() + std::ptrdiff_t(end))];
  }
  m.build_levels();
  return m;
}

void NGramModel::build_levels() {
  levels_.assign(static_cast<std::size_t>(order_) + 1, {});
  const bool kn = smoothing_.kind == Smoothing::kneser_ney;

  for (int level = 1; level <= order_; ++level) {
    Level& stats = levels_[static_cast<std::size_t>(level)];
    const bool continuation = kn && level < order_;
    std::set<std::vector<int>> extended;  // distinct (level+1)-grams

    for (const auto& [gram, count] : ngrams_) {
      const auto first = gram.end() - level;
      std::vector<int> context(first, gram.end() - 1);
      const int outcome = gram.back();
      // Contexts opening with BOS have no left extension other than BOS, so
      // they keep their raw counts.
      if (!continuation || (!context.empty() && context.front() == bos())) {
        stats[context].counts[outcome] += double(count);
      } else {
        extended.emplace(first - 1, gram.end());
      }
    }
    for (const auto& gram : extended) {
      std::vector<int> context(gram.begin() + 1, gram.end() - 1);
      stats[context].counts[gram.back()] += 1.0;
    }
    for (auto& [context, s] : stats) {
      s.total = 0.0;
      for (const auto& [outcome, c] : s.counts) s.total += c;
    }
  }
}

void NGramModel::check_token(int token) const {
  if (token < 0 || token >= num_tokens_)
    throw UnknownToken("token " + std::to_string(token) + " outside [0, " +
                       std::to_string(num_tokens_) + ")");
}

std::vector<int> NGramModel::context_of(std::span<const int> history) const {
  const auto want = static_cast<std::size_t>(order_ - 1);
  std::vector<int> ctx(want, bos());
  const std::size_t take = std::min(want, history.size());
  std::copy(history.end() - std::ptrdiff_t(take), history.end(),
            ctx.end() - std::ptrdiff_t(take));
  return ctx;
}

Eigen::VectorXd NGramModel::distribution(std::span<const int> history) const {
  const std::vector<int> ctx = context_of(history);
  const int support = support_size();

  auto lookup = [&](int level) -> const ContextStats* {
    const Level& stats = levels_[static_cast<std::size_t>(level)];
    const std::vector<int> h(ctx.end() - (level - 1), ctx.end());
    const auto it = stats.find(h);
    return it == stats.end() ? nullptr : &it->second;
  };

  if (smoothing_.kind == Smoothing::kneser_ney) {
    const double discount = smoothing_.param;
    Eigen::VectorXd p = Eigen::VectorXd::Constant(support, 1.0 / support);
    for (int level = 1; level <= order_; ++level) {
      const ContextStats* s = lookup(level);
      if (s == nullptr) continue;
      p *= discount * double(s->counts.size()) / s->total;
      for (const auto& [outcome, c] : s->counts) p[outcome] += (c - discount) / s->total;
    }
    return p;
  }

  const double k = smoothing_.param;
  const ContextStats* s = lookup(order_);
  if (k == 0.0)
    for (int level = order_ - 1; s == nullptr && level >= 1; --level) s = lookup(level);
  const double total = s ? s->total : 0.0;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(support, k);
  if (s)
    for (const auto& [outcome, c] : s->counts) p[outcome] += c;
  return p / (total + k * support);
}

double NGramModel::prob(std::span<const int> history, int outcome) const {
  if (outcome < 0 || outcome > eos())
    throw UnknownToken("outcome " + std::to_string(outcome) + " outside support");
  return distribution(history)[outcome];
}

double NGramModel::log_prob(std::span<const int> seq) const {
  for (int tok : seq) check_token(tok);
  double total = 0.0;
  for (std::size_t i = 0; i <= seq.size(); ++i) {
    const int outcome = i < seq.size() ? seq[i] : eos();
    total += std::log(distribution(seq.first(i))[outcome]);
  }
  return total;
}

bool NGramModel::operator==(const NGramModel& other) const {
  return order_ == other.order_ && num_tokens_ == other.num_tokens_ &&
         smoothing_.kind == other.smoothing_.kind &&
         smoothing_.param == other.smoothing_.param && seed_ == other.seed_ &&
         ngrams_ == other.ngrams_;
}

namespace {
constexpr std::uint32_t kPptlVersion = 1;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MalformedFile("cannot write " + path.string());
  os.write("PPTL", 4);
  detail::put<std::uint32_t>(os, kPptlVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(order_));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(num_tokens_));
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(smoothing_.kind));
  detail::put<double>(os, smoothing_.param);
  detail::put<std::uint64_t>(os, seed_);
  detail::put<std::uint64_t>(os, ngrams_.size());
  for (const auto& [gram, count] : ngrams_) {
    for (int id : gram) detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(id));
    detail::put<std::uint64_t>(os, count);
  }
  if (!os) throw MalformedFile("write failed: " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MalformedFile("cannot open " + ctx);
  detail::expect_magic(is, "PPTL", ctx);
  const auto version = detail::get<std::uint32_t>(is, ctx);
  if (version != kPptlVersion)
    throw VersionMismatch(ctx + ": PPTL version " + std::to_string(version));

  NGramModel m;
  m.order_ = static_cast<int>(detail::get<std::uint32_t>(is, ctx));
  m.num_tokens_ = static_cast<int>(detail::get<std::uint32_t>(is, ctx));
  const auto kind = detail::get<std::uint8_t>(is, ctx);
  if (kind > static_cast<std::uint8_t>(Smoothing::kneser_ney))
    throw MalformedFile(ctx + ": unknown smoothing " + std::to_string(kind));
  m.smoothing_.kind = static_cast<Smoothing>(kind);
  m.smoothing_.param = detail::get<double>(is, ctx);
  m.seed_ = detail::get<std::uint64_t>(is, ctx);
  if (m.order_ < 1 || m.num_tokens_ < 1)
    throw MalformedFile(ctx + ": bad order or vocabulary size");

  const auto entries = detail::get<std::uint64_t>(is, ctx);
  for (std::uint64_t e = 0; e < entries; ++e) {
    std::vector<int> gram(static_cast<std::size_t>(m.order_));
    for (int& id : gram) {
      id = static_cast<int>(detail::get<std::uint32_t>(is, ctx));
      if (id < 0 || id >= m.vocab_size())
        throw MalformedFile(ctx + ": id " + std::to_string(id) + " outside vocabulary");
    }
    m.ngrams_[std::move(gram)] = detail::get<std::uint64_t>(is, ctx);
  }
  if (m.ngrams_.empty()) throw MalformedFile(ctx + ": no n-grams");
  detail::expect_eof(is, ctx);
  m.build_levels();
  return m;
}

double perplexity(const NGramModel& m, std::span<const std::vector<int>> test) {
  if (test.empty()) throw EmptyCorpus("no test sequences");
  double log_sum = 0.0;
  double events = 0.0;
  for (const auto& seq : test) {
    log_sum += m.log_prob(seq);
    events += double(seq.size()) + 1.0;
  }
  return std::exp(-log_sum / events);
}

Eigen::VectorXd apply_temperature(const Eigen::VectorXd& p, double temperature) {
  const double t = std::max(temperature, 1e-6);
  Eigen::VectorXd logits(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    logits[i] = p[i] > 0.0 ? std::log(p[i]) / t : -std::numeric_limits<double>::infinity();
  const double top = logits.maxCoeff();
  // Scalar exp: the vectorized one turns -inf into a denormal, not zero.
  Eigen::VectorXd q = logits.unaryExpr([top](double v) { return std::exp(v - top); });
  return q / q.sum();
}

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

namespace {

std::vector<int> sample_with(const NGramModel& m, double temperature, int max_len,
                             std::mt19937_64& rng) {
  if (max_len < 1) throw ConfigError("max_len must be at least 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> seq;
  while (static_cast<int>(seq.size()) < max_len) {
    const Eigen::VectorXd q = apply_temperature(m.distribution(seq), temperature);
    const double u = unit(rng);
    int outcome = m.eos();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (q[i] <= 0.0) continue;
      acc += q[i];
      outcome = static_cast<int>(i);
      if (u < acc) break;
    }
    if (outcome == m.eos()) break;
    seq.push_back(outcome);
  }
  return seq;
}

}  // namespace

std::vector<int> sample(const NGramModel& m, double temperature, int max_len,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_with(m, temperature, max_len, rng);
}

std::vector<std::vector<int>> generate_batch(const NGramModel& m, int count,
                                             double temperature, int max_len,
                                             std::uint64_t seed) {
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(i)};
    std::mt19937_64 rng(seq);
    out.push_back(sample_with(m, temperature, max_len, rng));
  }
  return out;
}

}  // namespace pptok
