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

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

namespace pptok {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::mel_spectrogram: return "mel_spectrogram";
    case FeatureKind::mel_cepstra: return "mel_cepstra";
    case FeatureKind::external: return "external";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mel_spectrogram") return FeatureKind::mel_spectrogram;
  if (name == "mel_cepstra") return FeatureKind::mel_cepstra;
  if (name == "external") return FeatureKind::external;
  throw ConfigError("unknown feature kind '" + name + "'");
}

void MelConfig::validate(int sample_rate) const {
  if (n_fft <= 0 || hop <= 0 || win <= 0)
    throw ConfigError("n_fft, hop and win must be positive");
  if (win > n_fft) throw ConfigError("win must not exceed n_fft");
  if (n_mels <= 0) throw ConfigError("n_mels must be positive");
  if (n_mels > n_fft / 2 + 1)
    throw ConfigError("n_mels exceeds n_fft/2+1 frequency bins");
  if (fmin < 0.0 || fmin >= fmax) throw ConfigError("need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) throw ConfigError("fmax above Nyquist");
  if (!(log_floor > 0.0)) throw ConfigError("log_floor must be positive");
}

Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg, int sample_rate) {
  const int bins = cfg.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  Eigen::VectorXd edges(cfg.n_mels + 2);
  for (int m = 0; m < cfg.n_mels + 2; ++m)
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = double(k) * sample_rate / cfg.n_fft;
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

FeatureMatrix mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  cfg.validate(w.sample_rate);
  if (w.samples.size() == 0) throw EmptyInput("waveform has no samples");

  const Eigen::Index n = w.samples.size();
  const Eigen::Index frames = num_frames(n, cfg.hop);
  const int bins = cfg.n_fft / 2 + 1;

  // Periodic Hann, centered inside the FFT frame.
  std::vector<double> window(cfg.n_fft, 0.0);
  const int offset = (cfg.n_fft - cfg.win) / 2;
  for (int j = 0; j < cfg.win; ++j)
    window[offset + j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * j / cfg.win);

  const Eigen::MatrixXd fb = mel_filterbank(cfg, w.sample_rate);
  Eigen::FFT<double> fft;
  std::vector<double> frame(cfg.n_fft);
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd magnitude(bins);

  FeatureMatrix out;
  out.data.resize(frames, cfg.n_mels);
  out.frame_rate = double(w.sample_rate) / cfg.hop;
  out.kind = FeatureKind::mel_spectrogram;
  out.hop = cfg.hop;

  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index start = t * cfg.hop - cfg.n_fft / 2;
    for (int j = 0; j < cfg.n_fft; ++j)
      frame[j] = window[j] * w.samples[reflect_index(start + j, n)];
    fft.fwd(spectrum, frame);
    for (int k = 0; k < bins; ++k) magnitude[k] = std::abs(spectrum[k]);
    out.data.row(t) =
        (fb * magnitude).cwiseMax(cfg.log_floor).array().log().transpose();
  }
  return out;
}

Eigen::MatrixXd dct_matrix(Eigen::Index n) {
  Eigen::MatrixXd basis(n, n);
  const double s0 = std::sqrt(1.0 / double(n));
  const double sk = std::sqrt(2.0 / double(n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      basis(k, i) = (k == 0 ? s0 : sk) *
                    std::cos(std::numbers::pi * double(k) * (2.0 * i + 1.0) / (2.0 * n));
  return basis;
}

FeatureMatrix mel_cepstra(const FeatureMatrix& log_mel, int n_coef) {
  if (log_mel.kind != FeatureKind::mel_spectrogram)
    throw ConfigError("mel_cepstra expects mel_spectrogram features");
  if (n_coef < 1 || n_coef > log_mel.dim())
    throw ConfigError("n_coef must lie in [1, n_mels]");
  const Eigen::MatrixXd basis = dct_matrix(log_mel.dim()).topRows(n_coef);
  FeatureMatrix out = log_mel;
  out.data = log_mel.data * basis.transpose();
  out.kind = FeatureKind::mel_cepstra;
  return out;
}

FeatureMatrix inverse_mel_cepstra(const FeatureMatrix& cepstra) {
  if (cepstra.kind != FeatureKind::mel_cepstra)
    throw ConfigError("inverse_mel_cepstra expects mel_cepstra features");
  FeatureMatrix out = cepstra;
  // Orthonormal basis: inverse is the transpose.
  out.data = cepstra.data * dct_matrix(cepstra.dim());
  out.kind = FeatureKind::mel_spectrogram;
  return out;
}

FeatureMatrix normalize_per_utterance(const FeatureMatrix& f) {
  FeatureMatrix out = f;
  if (f.frames() == 0) return out;
  const Eigen::RowVectorXd mean = f.data.colwise().mean();
  out.data.rowwise() -= mean;
  const Eigen::RowVectorXd stddev =
      (out.data.array().square().colwise().sum() / double(f.frames())).sqrt();
  for (Eigen::Index d = 0; d < f.dim(); ++d)
    if (stddev[d] > 1e-12) out.data.col(d) /= stddev[d];
  return out;
}

}  // namespace pptok
