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

#include "pptok/audio.hpp"

#include "pptok/errors.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pptok {

namespace {

constexpr int kZeroCrossings = 32;
constexpr double kKaiserBeta = 8.6;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double r) {
  // r in [-1, 1]
  if (std::abs(r) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ConfigError("target_rate must be positive");
  if (w.sample_rate <= 0) throw ConfigError("source sample_rate must be positive");
  if (target_rate == w.sample_rate) return w;

  const std::int64_t in_rate = w.sample_rate;
  const std::int64_t out_rate = target_rate;
  const std::int64_t n_in = w.samples.size();
  const std::int64_t n_out = (n_in * out_rate + in_rate - 1) / in_rate;

  // Cutoff relative to the input Nyquist; below 1 when downsampling.
  const double cutoff = std::min(1.0, double(out_rate) / double(in_rate));
  const double half_width = kZeroCrossings / cutoff;

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.setZero(n_out);
  for (std::int64_t n = 0; n < n_out; ++n) {
    const double t = double(n * in_rate) / double(out_rate);
    const auto lo = std::max<std::int64_t>(0, std::int64_t(std::ceil(t - half_width)));
    const auto hi = std::min<std::int64_t>(n_in - 1, std::int64_t(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double x = t - double(k);
      acc += w.samples[k] * cutoff * sinc(cutoff * x) * kaiser(x / half_width);
    }
    out.samples[n] = acc;
  }
  return out;
}

}  // namespace pptok
