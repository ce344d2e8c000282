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

#include <filesystem>
#include <string>

namespace pptok {

/// Mono waveform with amplitudes in [-1, 1].
struct Waveform {
  Eigen::VectorXd samples;
  int sample_rate = 16000;

  Eigen::Index size() const { return samples.size(); }
  double duration_sec() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a RIFF/WAVE file. Integer PCM (8/16/24/32 bit) and 32-bit IEEE
/// float are accepted, either as plain format tags or inside
/// WAVE_FORMAT_EXTENSIBLE. Multi-channel input is averaged to mono.
Waveform load_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono. Samples are clipped to [-1, 1].
void save_wav(const std::filesystem::path& path, const Waveform& w);

/// Band-limited resampling with a Kaiser-windowed sinc kernel. The output
/// holds ceil(n * target_rate / sample_rate) samples.
Waveform resample(const Waveform& w, int target_rate);

/// Scales so that max |sample| == peak. Silent input is returned unchanged.
Waveform peak_normalize(const Waveform& w, double peak = 0.95);

}  // namespace pptok
