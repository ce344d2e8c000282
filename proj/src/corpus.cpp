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

#include "pptok/corpus.hpp"

#include "pptok/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

namespace pptok {

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
    case Split::excluded: return "excluded";
  }
  return "unknown";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  if (name == "excluded") return Split::excluded;
  throw ConfigError("unknown split '" + name + "'");
}

ManifestStats Manifest::stats(double max_duration) const {
  ManifestStats s;
  for (const auto& r : records) {
    ++s.per_split[r.split];
    if (r.split == Split::excluded) {
      if (r.duration_sec > max_duration) ++s.too_long;
      if (!r.has_pitch) ++s.no_pitch;
    } else {
      ++s.utterances_per_speaker[r.speaker];
    }
  }
  return s;
}

std::vector<const UtteranceRecord*> Manifest::in_split(Split s) const {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : records)
    if (r.split == s) out.push_back(&r);
  return out;
}

const UtteranceRecord* Manifest::find(const std::string& id) const {
  for (const auto& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

Manifest filter_utterances(const Manifest& m, double max_duration) {
  Manifest out = m;
  for (auto& r : out.records)
    if (r.duration_sec > max_duration || !r.has_pitch) r.split = Split::excluded;
  return out;
}

Manifest make_splits(const Manifest& m, const SplitOptions& opts) {
  if (opts.test_speakers < 0 || opts.utts_per_test_speaker < 0 || opts.valid_size < 0)
    throw ConfigError("split sizes must be non-negative");
  if (opts.min_speaker_utts < opts.utts_per_test_speaker)
    throw ConfigError("min_speaker_utts below utts_per_test_speaker");

  Manifest out = m;
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (out.records[i].split == Split::excluded) continue;
    usable.push_back(i);
    by_speaker[out.records[i].speaker].push_back(i);
  }

  std::vector<std::string> eligible;  // sorted by the map
  for (const auto& [speaker, idx] : by_speaker)
    if (int(idx.size()) >= opts.min_speaker_utts) eligible.push_back(speaker);
  if (int(eligible.size()) < opts.test_speakers)
    throw InsufficientSpeakers(std::to_string(eligible.size()) +
                               " speakers have at least " +
                               std::to_string(opts.min_speaker_utts) +
                               " utterances, need " + std::to_string(opts.test_speakers));

  std::mt19937_64 rng(opts.seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(static_cast<std::size_t>(opts.test_speakers));
  std::sort(eligible.begin(), eligible.end());

  std::set<std::size_t> test;
  for (const auto& speaker : eligible) {
    std::vector<std::size_t> idx = by_speaker[speaker];
    std::shuffle(idx.begin(), idx.end(), rng);
    test.insert(idx.begin(), idx.begin() + opts.utts_per_test_speaker);
  }

  std::vector<std::size_t> rest;
  for (std::size_t i : usable)
    if (!test.count(i)) rest.push_back(i);
  std::shuffle(rest.begin(), rest.end(), rng);
  const std::size_t n_valid = std::min(rest.size(), std::size_t(opts.valid_size));
  const std::set<std::size_t> valid(rest.begin(), rest.begin() + std::ptrdiff_t(n_valid));

  for (std::size_t i : usable)
    out.records[i].split = test.count(i)    ? Split::test
                           : valid.count(i) ? Split::valid
                                            : Split::train;
  return out;
}

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw MalformedRecord(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedRecord(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Manifest read_manifest(std::istream& is, const std::string& context) {
  Manifest m;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = context + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRecord(where + ": " + e.what());
    }
    if (!j.is_object()) throw MalformedRecord(where + ": expected a JSON object");

    UtteranceRecord r;
    r.id = required<std::string>(j, "id", where);
    r.speaker = required<std::string>(j, "speaker", where);
    r.audio_path = required<std::string>(j, "audio_path", where);
    r.duration_sec = required<double>(j, "duration_sec", where);
    r.has_pitch = required<bool>(j, "has_pitch", where);
    try {
      r.split = split_from_string(required<std::string>(j, "split", where));
    } catch (const ConfigError& e) {
      throw MalformedRecord(where + ": " + e.what());
    }
    if (r.id.empty()) throw MalformedRecord(where + ": empty id");
    if (!(r.duration_sec > 0.0)) throw MalformedRecord(where + ": duration must be positive");
    if (!ids.insert(r.id).second) throw MalformedRecord(where + ": duplicate id '" + r.id + "'");
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MalformedFile("cannot open " + path.string());
  return read_manifest(is, path.string());
}

void write_manifest(std::ostream& os, const Manifest& m) {
  for (const auto& r : m.records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["speaker"] = r.speaker;
    j["audio_path"] = r.audio_path;
    j["duration_sec"] = r.duration_sec;
    j["has_pitch"] = r.has_pitch;
    j["split"] = to_string(r.split);
    os << j.dump() << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os) throw MalformedFile("cannot write " + path.string());
  write_manifest(os, m);
}

}  // namespace pptok
