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

#include "pptok/audio.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pptok {

enum class FeatureKind : std::uint8_t {
  mel_spectrogram = 0,
  mel_cepstra = 1,
  external = 2,
};

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// T x D frame-level features. Rows are frames.
struct FeatureMatrix {
  Eigen::MatrixXd data;
  double frame_rate = 50.0;
  FeatureKind kind = FeatureKind::external;
  int hop = 320;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

struct MelConfig {
  int n_fft = 1024;
  int hop = 320;
  int win = 1024;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  void validate(int sample_rate) const;
};

/// Number of frames produced for n samples at the given hop: ceil(n / hop).
inline Eigen::Index num_frames(Eigen::Index num_samples, int hop) {
  return (num_samples + hop - 1) / hop;
}

/// Mirror index for reflect padding, valid for any integer and any n >= 1.
Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank, n_mels x (n_fft/2 + 1).
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg, int sample_rate);

/// Log mel magnitudes, log(max(mel, floor)). Frame t is centered on
/// sample t * hop with reflect padding at both ends.
FeatureMatrix mel_spectrogram(const Waveform& w, const MelConfig& cfg = {});

/// Orthonormal DCT-II basis, rows are basis vectors (n x n).
Eigen::MatrixXd dct_matrix(Eigen::Index n);

/// Per-frame orthonormal DCT-II of the log-mel rows, truncated to n_coef.
FeatureMatrix mel_cepstra(const FeatureMatrix& log_mel, int n_coef);

/// Inverse of mel_cepstra when all coefficients were kept.
FeatureMatrix inverse_mel_cepstra(const FeatureMatrix& cepstra);

/// Mean and variance normalization per dimension, computed over frames.
FeatureMatrix normalize_per_utterance(const FeatureMatrix& f);

// ---------------------------------------------------------------------------
// Pitch

struct PitchConfig {
  int hop = 320;
  double fmin = 50.0;
  double fmax = 600.0;
  /// Minimum periodicity (1 - cumulative-mean-normalized difference) for a
  /// frame to count as voiced.
  double voicing_threshold = 0.75;
};

struct PitchTrack {
  Eigen::VectorXd f0;          // Hz, 0 where unvoiced
  std::vector<bool> voiced;
  double frame_rate = 50.0;
  std::string tracker = "yin";

  Eigen::Index frames() const { return f0.size(); }
  bool any_voiced() const;
};

PitchTrack extract_f0(const Waveform& w, const PitchConfig& cfg = {});

// ---------------------------------------------------------------------------
// PPTF binary feature files

void write_features(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace pptok
