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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pptok {

enum class Split { train, valid, test, excluded };

std::string to_string(Split s);
Split split_from_string(const std::string& name);

struct UtteranceRecord {
  std::string id;
  std::string speaker;
  std::string audio_path;
  double duration_sec = 0.0;
  bool has_pitch = false;
  Split split = Split::train;

  bool operator==(const UtteranceRecord&) const = default;
};

struct ManifestStats {
  std::map<std::string, int> utterances_per_speaker;  // non-excluded only
  std::map<Split, int> per_split;
  int too_long = 0;   // excluded for duration
  int no_pitch = 0;   // excluded for missing pitch
};

struct Manifest {
  std::vector<UtteranceRecord> records;

  ManifestStats stats(double max_duration = 20.0) const;
  std::vector<const UtteranceRecord*> in_split(Split s) const;
  const UtteranceRecord* find(const std::string& id) const;

  bool operator==(const Manifest&) const = default;
};

/// Marks records longer than max_duration or without pitch as excluded.
Manifest filter_utterances(const Manifest& m, double max_duration = 20.0);

struct SplitOptions {
  int test_speakers = 30;
  int utts_per_test_speaker = 3;
  int valid_size = 90;
  int min_speaker_utts = 10;
  std::uint64_t seed = 0;
};

/// Test: utts_per_test_speaker random utterances from each of test_speakers
/// random speakers having at least min_speaker_utts usable utterances.
/// Valid: valid_size random remaining utterances. Train: the rest.
Manifest make_splits(const Manifest& m, const SplitOptions& opts = {});

// JSONL, one record per line with fields id, speaker, audio_path,
// duration_sec, has_pitch, split.
Manifest read_manifest(std::istream& is, const std::string& context = "<stream>");
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& os, const Manifest& m);
void save_manifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace pptok
