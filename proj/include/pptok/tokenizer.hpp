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

#include "pptok/kmeans.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pptok {

/// Run-length form of a frame label sequence: no two adjacent tokens are
/// equal and each duration (in frames) is at least one.
struct TokenSequence {
  std::vector<int> tokens;
  std::vector<int> durations;
  int total_frames = 0;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenSequence&) const = default;
};

TokenSequence rle_encode(std::span<const int> frames);

/// Throws InvariantViolation on a zero duration, adjacent duplicates,
/// length mismatch, or a total_frames that disagrees with the durations.
std::vector<int> rle_expand(const TokenSequence& ts);

/// rle_encode(assign(cb, features)).
TokenSequence tokenize_utterance(const Codebook& cb, const FeatureMatrix& features);

// ---------------------------------------------------------------------------
// Token files: "<utt_id>\t<tok,dur tok,dur ...>" or, without durations,
// "<utt_id>\t<tok tok ...>".

struct TokenRecord {
  std::string id;
  TokenSequence seq;
};

void write_token_records(std::ostream& os, std::span<const TokenRecord> records,
                         bool with_durations = true);
void write_token_file(const std::filesystem::path& path,
                      std::span<const TokenRecord> records,
                      bool with_durations = true);

/// Reads either layout. Lines without durations get unit durations.
std::vector<TokenRecord> read_token_records(std::istream& is,
                                            const std::string& context = "<stream>");
std::vector<TokenRecord> read_token_file(const std::filesystem::path& path);

/// Just the token sequences, in file order.
std::vector<std::vector<int>> token_sequences(std::span<const TokenRecord> records);

}  // namespace pptok
