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

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pptok {

enum class Smoothing : std::uint8_t { add_k = 0, kneser_ney = 1 };

struct SmoothingSpec {
  Smoothing kind = Smoothing::kneser_ney;
  double param = 0.75;  // k for add_k, discount for kneser_ney

  static SmoothingSpec add_k(double k) { return {Smoothing::add_k, k}; }
  static SmoothingSpec kneser_ney(double discount = 0.75) {
    return {Smoothing::kneser_ney, discount};
  }
};

std::string to_string(const SmoothingSpec& s);

/// Count-based language model over token ids [0, num_tokens). Id
/// num_tokens is the end-of-sequence outcome; id num_tokens + 1 is the
/// begin-of-sequence symbol, which only ever pads contexts.
///
/// With add_k the full (order-1)-token context is used directly; when k is
/// zero and the context was never seen, the longest seen suffix is used.
/// With kneser_ney each order interpolates with the next lower one, lower
/// orders use continuation counts, and order zero is uniform.
class NGramModel {
 public:
  static NGramModel train(std::span<const std::vector<int>> corpus, int num_tokens,
                          int order, SmoothingSpec smoothing = {},
                          std::uint64_t seed = 0);

  int order() const { return order_; }
  int num_tokens() const { return num_tokens_; }
  int vocab_size() const { return num_tokens_ + 2; }
  int eos() const { return num_tokens_; }
  int bos() const { return num_tokens_ + 1; }
  /// Number of predictable outcomes (tokens plus end-of-sequence).
  int support_size() const { return num_tokens_ + 1; }
  const SmoothingSpec& smoothing() const { return smoothing_; }
  std::uint64_t seed() const { return seed_; }

  /// P(. | history) over the support; index eos() is end-of-sequence.
  /// The history is the token prefix so far; it is left-padded with BOS.
  Eigen::VectorXd distribution(std::span<const int> history) const;

  double prob(std::span<const int> history, int outcome) const;

  /// Sum of log-probabilities of every token and the final EOS.
  double log_prob(std::span<const int> seq) const;

  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  bool operator==(const NGramModel& other) const;

 private:
  struct ContextStats {
    std::map<int, double> counts;
    double total = 0.0;
  };
  using Level = std::map<std::vector<int>, ContextStats>;

  void build_levels();
  std::vector<int> context_of(std::span<const int> history) const;
  void check_token(int token) const;

  int order_ = 1;
  int num_tokens_ = 0;
  SmoothingSpec smoothing_;
  std::uint64_t seed_ = 0;
  std::map<std::vector<int>, std::uint64_t> ngrams_;  // full-order counts
  std::vector<Level> levels_;                           // index m: context length m-1
};

/// exp(-sum log P / N), N counting every token plus one EOS per sequence.
double perplexity(const NGramModel& m, std::span<const std::vector<int>> test);

/// p^(1/T) renormalized; T is clamped below at 1e-6.
Eigen::VectorXd apply_temperature(const Eigen::VectorXd& p, double temperature);

/// Shannon entropy in nats.
double entropy(const Eigen::VectorXd& p);

/// Ancestral sampling until EOS or max_len tokens.
std::vector<int> sample(const NGramModel& m, double temperature, int max_len,
                        std::uint64_t seed);

/// count samples, the i-th drawn with a sub-seed derived from (seed, i).
std::vector<std::vector<int>> generate_batch(const NGramModel& m, int count = 90,
                                             double temperature = 0.7,
                                             int max_len = 500, std::uint64_t seed = 0);

}  // namespace pptok
