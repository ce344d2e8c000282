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

// Signal generators, raw file writers and brute-force oracles shared by the
// unit and acceptance suites. Nothing here calls into the code under test.

#include "pptok/audio.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace pptok::testing {

inline Waveform sine(double freq, double seconds, int rate = 16000, double amp = 0.5,
                     double phase = 0.0) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * rate));
  w.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * double(i) / rate + phase);
  return w;
}

/// Harmonic complex with 1/h amplitude roll-off plus a spectral tilt that
/// distinguishes classes by their envelope as well as their fundamental.
inline Waveform tone_complex(double f0, double seconds, int harmonics, double tilt,
                             int rate = 16000, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * rate));
  w.samples.setZero(n);
  double norm = 0.0;
  for (int h = 1; h <= harmonics; ++h) {
    const double f = f0 * h;
    if (f >= rate / 2.0) break;
    const double a = std::pow(double(h), -tilt);
    norm += a;
    for (Eigen::Index i = 0; i < n; ++i)
      w.samples[i] += a * std::sin(2.0 * std::numbers::pi * f * double(i) / rate);
  }
  w.samples *= amp / norm;
  return w;
}

inline Waveform white_noise(double seconds, std::uint64_t seed, int rate = 16000,
                            double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<Eigen::Index>(std::llround(seconds * rate)));
  for (Eigen::Index i = 0; i < w.samples.size(); ++i) w.samples[i] = u(rng);
  return w;
}

inline Waveform concat(const Waveform& a, const Waveform& b) {
  Waveform w;
  w.sample_rate = a.sample_rate;
  w.samples.resize(a.size() + b.size());
  w.samples << a.samples, b.samples;
  return w;
}

/// Writes a RIFF/WAVE file with an arbitrary fmt chunk and payload.
inline void write_raw_wav(const std::filesystem::path& path, std::uint16_t format,
                          std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                          const std::vector<unsigned char>& payload,
                          std::uint32_t declared_size = std::numeric_limits<std::uint32_t>::max()) {
  std::ofstream os(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(char((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&](std::uint16_t v) {
    os.put(char(v & 0xff));
    os.put(char(v >> 8));
  };
  const std::uint32_t size =
      declared_size == std::numeric_limits<std::uint32_t>::max() ? payload.size() : declared_size;
  os.write("RIFF", 4);
  u32(36 + size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(std::uint16_t(channels * bits / 8));
  u16(bits);
  os.write("data", 4);
  u32(size);
  os.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
}

template <typename T>
void append_le(std::vector<unsigned char>& out, T v, int bytes = sizeof(T)) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

/// |DFT| at bins 0..n/2 by direct summation.
inline Eigen::VectorXd naive_dft_magnitude(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd mag(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double ang = 2.0 * std::numbers::pi * double(k) * double(t) / double(n);
      re += x[t] * std::cos(ang);
      im -= x[t] * std::sin(ang);
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

/// Direct DCT-II summation with orthonormal scaling.
inline Eigen::VectorXd naive_dct(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      s += x[i] * std::cos(std::numbers::pi * double(k) * (2.0 * double(i) + 1.0) / (2.0 * double(n)));
    c[k] = s * (k == 0 ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n)));
  }
  return c;
}

inline double rms(const Eigen::VectorXd& x) {
  return std::sqrt(x.squaredNorm() / double(x.size()));
}

/// Minimum monotone-path cost by recursive enumeration of every path from
/// (0,0) to (n-1,m-1) with steps (1,0), (0,1), (1,1).
inline double brute_force_dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool squared) {
  const Eigen::Index n = a.rows(), m = b.rows();
  auto local = [&](Eigen::Index i, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < a.cols(); ++d) s += (a(i, d) - b(j, d)) * (a(i, d) - b(j, d));
    return squared ? s : std::sqrt(s);
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j,
                                                                     double acc) {
    acc += local(i, j);
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// Lowest k-means objective over every assignment of the points to k
/// non-empty clusters (each cluster at its mean). Exponential; tiny inputs.
inline double exhaustive_kmeans_optimum(const Eigen::MatrixXd& pts, int k) {
  const Eigen::Index n = pts.rows();
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, int)> rec = [&](Eigen::Index i, int used) {
    if (i == n) {
      if (used != k) return;
      double cost = 0.0;
      for (int c = 0; c < k; ++c) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(pts.cols());
        int cnt = 0;
        for (Eigen::Index p = 0; p < n; ++p)
          if (label[std::size_t(p)] == c) { mean += pts.row(p); ++cnt; }
        mean /= cnt;
        for (Eigen::Index p = 0; p < n; ++p)
          if (label[std::size_t(p)] == c) cost += (pts.row(p) - mean).squaredNorm();
      }
      best = std::min(best, cost);
      return;
    }
    // Canonical labelling: point i joins an existing cluster or opens the next one.
    for (int c = 0; c < std::min(used + 1, k); ++c) {
      label[std::size_t(i)] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

/// Well-separated isotropic Gaussian blobs; returns points and true labels.
inline std::pair<Eigen::MatrixXd, std::vector<int>> gaussian_blobs(
    const std::vector<Eigen::Vector2d>& centers, int per_blob, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Eigen::MatrixXd pts(Eigen::Index(centers.size()) * per_blob, 2);
  std::vector<int> labels;
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (int i = 0; i < per_blob; ++i, ++r) {
      pts(r, 0) = centers[c].x() + g(rng);
      pts(r, 1) = centers[c].y() + g(rng);
      labels.push_back(int(c));
    }
  return {pts, labels};
}

/// Majority-vote purity of predicted labels against reference classes.
inline double purity(const std::vector<int>& predicted, const std::vector<int>& truth) {
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < predicted.size(); ++i) ++table[predicted[i]][truth[i]];
  int agree = 0;
  for (const auto& [p, row] : table) {
    int best = 0;
    for (const auto& [t, c] : row) best = std::max(best, c);
    agree += best;
  }
  return double(agree) / double(predicted.size());
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pptok_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pptok::testing
