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

#include "pptok/features.hpp"

#include "pptok/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pptok {

bool PitchTrack::any_voiced() const {
  return std::find(voiced.begin(), voiced.end(), true) != voiced.end();
}

// YIN: squared-difference function, cumulative-mean normalization, first dip
// under the aperiodicity threshold, parabolic refinement.
PitchTrack extract_f0(const Waveform& w, const PitchConfig& cfg) {
  if (cfg.hop <= 0) throw ConfigError("hop must be positive");
  if (!(cfg.fmin > 0.0) || cfg.fmin >= cfg.fmax)
    throw ConfigError("need 0 < fmin < fmax");
  if (cfg.voicing_threshold <= 0.0 || cfg.voicing_threshold >= 1.0)
    throw ConfigError("voicing_threshold must lie in (0, 1)");

  const Eigen::Index n = w.samples.size();
  const Eigen::Index frames = n == 0 ? 0 : num_frames(n, cfg.hop);
  const int lag_min = std::max(1, int(std::floor(w.sample_rate / cfg.fmax)));
  const int lag_max = int(std::ceil(w.sample_rate / cfg.fmin));
  const int window = lag_max;
  const int span = window + lag_max;
  const double aperiodicity = 1.0 - cfg.voicing_threshold;

  PitchTrack track;
  track.f0.setZero(frames);
  track.voiced.assign(static_cast<std::size_t>(frames), false);
  track.frame_rate = double(w.sample_rate) / cfg.hop;

  Eigen::VectorXd x(span);
  Eigen::VectorXd diff(lag_max + 2);
  Eigen::VectorXd cmnd(lag_max + 2);

  for (Eigen::Index t = 0; t < frames; ++t) {
    Eigen::Index start = t * cfg.hop - span / 2;
    // Mirrored edges fake periodicity; keep the span inside when it fits.
    if (n >= span) start = std::clamp<Eigen::Index>(start, 0, n - span);
    for (int j = 0; j < span; ++j) x[j] = w.samples[reflect_index(start + j, n)];
    if (x.head(window).squaredNorm() < 1e-10 * window) continue;

    const int top = std::min(lag_max + 1, span - window);
    diff[0] = 0.0;
    cmnd[0] = 1.0;
    double running = 0.0;
    for (int lag = 1; lag <= top; ++lag) {
      diff[lag] = (x.segment(0, window) - x.segment(lag, window)).squaredNorm();
      running += diff[lag];
      cmnd[lag] = running > 0.0 ? diff[lag] * lag / running : 1.0;
    }

    int best = -1;
    for (int lag = lag_min; lag <= std::min(lag_max, top); ++lag) {
      if (cmnd[lag] < aperiodicity) {
        while (lag + 1 <= top && cmnd[lag + 1] < cmnd[lag]) ++lag;
        best = lag;
        break;
      }
    }
    if (best < 0) continue;

    double period = best;
    if (best > 1 && best < top) {
      const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
      const double denom = a - 2.0 * b + c;
      if (denom > 0.0) period += 0.5 * (a - c) / denom;
    }
    const double f0 = w.sample_rate / period;
    if (f0 < cfg.fmin || f0 > cfg.fmax) continue;
    track.f0[t] = f0;
    track.voiced[static_cast<std::size_t>(t)] = true;
  }
  return track;
}

}  // namespace pptok
