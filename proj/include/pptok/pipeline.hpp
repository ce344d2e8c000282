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

// End-to-end stages shared by the command line tool and the tests:
// audio -> features -> codebook -> tokens -> token LM -> metrics.

#include "pptok/corpus.hpp"
#include "pptok/features.hpp"
#include "pptok/kmeans.hpp"
#include "pptok/metrics.hpp"
#include "pptok/ngram.hpp"
#include "pptok/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pptok {

struct PipelineConfig {
  int sample_rate = 16000;
  int hop = 320;
  int n_coef = 13;
  MelConfig mel;
  PitchConfig pitch;

  int k = 200;
  int kmeans_batch = 10000;
  int kmeans_max_iters = 300;
  double kmeans_tol = 1e-4;

  int lm_order = 5;
  SmoothingSpec smoothing = SmoothingSpec::kneser_ney(0.75);
  double temperature = 0.7;
  int gen_count = 90;
  int max_len = 500;

  std::uint64_t seed = 0;
  int jobs = 1;

  /// Throws ConfigError unless every size is positive and the feature
  /// settings are consistent; also propagates hop into mel and pitch.
  void validate();
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest_dir,
                                         const std::string& audio_path);

/// Loads audio, resamples to the configured rate.
Waveform load_audio(const std::filesystem::path& path, const PipelineConfig& cfg);

/// mel_spectrogram or mel_cepstra (external is not computable from audio).
FeatureMatrix compute_features(const Waveform& w, FeatureKind kind,
                               const PipelineConfig& cfg);

struct AudioAnalysis {
  FeatureMatrix cepstra;
  PitchTrack pitch;
};
AudioAnalysis analyze_audio(const Waveform& w, const PipelineConfig& cfg);

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& id);

struct StageFailure {
  std::string id;
  std::string message;
};

/// Writes one PPTF per record. Failures are collected per utterance.
std::vector<StageFailure> extract_features(
    const std::vector<const UtteranceRecord*>& records,
    const std::filesystem::path& manifest_dir, const std::filesystem::path& out_dir,
    FeatureKind kind, const PipelineConfig& cfg);

/// Fills duration_sec and has_pitch from the audio files.
Manifest probe_audio(const Manifest& m, const std::filesystem::path& manifest_dir,
                     const PipelineConfig& cfg, std::vector<StageFailure>* failures);

struct UtteranceFeatures {
  std::string id;
  FeatureMatrix features;
};

/// Throws MissingFeatures when the directory is absent/empty or any id lacks a file.
std::vector<UtteranceFeatures> load_feature_dir(const std::filesystem::path& dir,
                                                const std::vector<std::string>& ids);

std::vector<std::string> ids_of(const std::vector<const UtteranceRecord*>& records);

Codebook fit_codebook(const std::vector<UtteranceFeatures>& utterances,
                      const PipelineConfig& cfg, KMeansTrace* trace = nullptr);

std::vector<TokenRecord> tokenize_all(const Codebook& cb,
                                      const std::vector<UtteranceFeatures>& utterances,
                                      int jobs = 1);

NGramModel train_token_lm(const std::vector<TokenRecord>& records, int num_tokens,
                          const PipelineConfig& cfg);

std::vector<TokenRecord> generate_token_records(const NGramModel& lm,
                                                const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Reports

struct MetricsReport {
  std::optional<double> mcd_db;
  std::optional<double> f0_rmse_hz;
  std::optional<double> ppl;
  std::optional<double> self_bleu;
  std::optional<double> self_bleu_gt;
  std::optional<double> normalized_self_bleu;
  int mcd_pairs = 0;
  int f0_pairs = 0;
  int skipped_no_voiced_overlap = 0;
  bool normalized_exceeds_one = false;

  std::string to_text() const;
  std::string to_json() const;
};

/// MCD and F0-RMSE between ground-truth and generated audio paired by id,
/// each averaged over utterances. Throws IdMismatch when the id sets differ.
void evaluate_audio_pairs(const std::vector<const UtteranceRecord*>& gt,
                          const std::filesystem::path& gt_dir,
                          const std::vector<const UtteranceRecord*>& generated,
                          const std::filesystem::path& gen_dir, const PipelineConfig& cfg,
                          MetricsReport& report);

void evaluate_audio_pairs(const std::vector<AudioAnalysis>& gt,
                          const std::vector<AudioAnalysis>& generated,
                          MetricsReport& report);

void evaluate_token_diversity(const std::vector<std::vector<int>>& generated,
                              const std::vector<std::vector<int>>& ground_truth,
                              MetricsReport& report);

/// Checks that every expected id appears in the records and nothing else does.
void require_same_ids(const std::vector<std::string>& expected,
                      const std::vector<std::string>& got, const std::string& what);

struct SweepRow {
  int layer = 0;
  std::string source;
  double ppl = 0.0;
  double self_bleu = 0.0;
  double self_bleu_gt = 0.0;
  double normalized_self_bleu = 0.0;
  std::uint32_t kmeans_iterations = 0;
};

/// Per feature directory: fit codebook on train, tokenize train and test,
/// train the token LM, report test perplexity and normalized Self-BLEU of
/// gen_count generated sequences.
SweepRow sweep_layer(int layer, const std::filesystem::path& dir, const Manifest& m,
                     const PipelineConfig& cfg);
std::vector<SweepRow> sweep(const std::vector<std::filesystem::path>& dirs,
                            const Manifest& m, const PipelineConfig& cfg);
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace pptok
