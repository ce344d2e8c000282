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

#include "pptok/tokenizer.hpp"

#include "pptok/errors.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace pptok {

TokenSequence rle_encode(std::span<const int> frames) {
  TokenSequence ts;
  for (int label : frames) {
    if (!ts.tokens.empty() && ts.tokens.back() == label) {
      ++ts.durations.back();
    } else {
      ts.tokens.push_back(label);
      ts.durations.push_back(1);
    }
  }
  ts.total_frames = static_cast<int>(frames.size());
  return ts;
}

std::vector<int> rle_expand(const TokenSequence& ts) {
  if (ts.tokens.size() != ts.durations.size())
    throw InvariantViolation("tokens and durations differ in length");
  std::vector<int> frames;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    if (ts.durations[i] < 1)
      throw InvariantViolation("duration at position " + std::to_string(i) + " is " +
                               std::to_string(ts.durations[i]));
    if (i > 0 && ts.tokens[i] == ts.tokens[i - 1])
      throw InvariantViolation("repeated token " + std::to_string(ts.tokens[i]) +
                               " at position " + std::to_string(i));
    frames.insert(frames.end(), static_cast<std::size_t>(ts.durations[i]), ts.tokens[i]);
  }
  if (static_cast<int>(frames.size()) != ts.total_frames)
    throw InvariantViolation("durations sum to " + std::to_string(frames.size()) +
                             ", total_frames is " + std::to_string(ts.total_frames));
  return frames;
}

TokenSequence tokenize_utterance(const Codebook& cb, const FeatureMatrix& features) {
  const std::vector<int> labels = assign(cb, features);
  return rle_encode(labels);
}

void write_token_records(std::ostream& os, std::span<const TokenRecord> records,
                         bool with_durations) {
  for (const auto& rec : records) {
    os << rec.id << '\t';
    for (std::size_t i = 0; i < rec.seq.tokens.size(); ++i) {
      if (i) os << ' ';
      os << rec.seq.tokens[i];
      if (with_durations) os << ',' << rec.seq.durations[i];
    }
    os << '\n';
  }
}

void write_token_file(const std::filesystem::path& path,
                      std::span<const TokenRecord> records, bool with_durations) {
  std::ofstream os(path);
  if (!os) throw MalformedFile("cannot write " + path.string());
  write_token_records(os, records, with_durations);
}

namespace {

int parse_int(std::string_view text, const std::string& where) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw MalformedFile(where + ": bad integer '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::vector<TokenRecord> read_token_records(std::istream& is, const std::string& context) {
  std::vector<TokenRecord> records;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = context + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw MalformedFile(where + ": expected '<id>\\t<tokens>'");

    TokenRecord rec;
    rec.id = line.substr(0, tab);
    if (!ids.insert(rec.id).second) throw MalformedFile(where + ": duplicate id '" + rec.id + "'");
    std::istringstream fields(line.substr(tab + 1));
    std::string item;
    bool any_duration = false;
    while (fields >> item) {
      const auto comma = item.find(',');
      const std::string_view view(item);
      if (comma == std::string::npos) {
        rec.seq.tokens.push_back(parse_int(view, where));
        rec.seq.durations.push_back(1);
      } else {
        any_duration = true;
        rec.seq.tokens.push_back(parse_int(view.substr(0, comma), where));
        rec.seq.durations.push_back(parse_int(view.substr(comma + 1), where));
      }
      if (rec.seq.tokens.back() < 0) throw MalformedFile(where + ": negative token id");
      if (rec.seq.durations.back() < 1) throw MalformedFile(where + ": duration below 1");
    }
    // Run-length records never repeat a token; sampled sequences may.
    if (any_duration)
      for (std::size_t i = 1; i < rec.seq.tokens.size(); ++i)
        if (rec.seq.tokens[i] == rec.seq.tokens[i - 1])
          throw MalformedFile(where + ": adjacent duplicate token in run-length record");
    rec.seq.total_frames =
        std::accumulate(rec.seq.durations.begin(), rec.seq.durations.end(), 0);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TokenRecord> read_token_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MalformedFile("cannot open " + path.string());
  return read_token_records(is, path.string());
}

std::vector<std::vector<int>> token_sequences(std::span<const TokenRecord> records) {
  std::vector<std::vector<int>> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(rec.seq.tokens);
  return out;
}

}  // namespace pptok
