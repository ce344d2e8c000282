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

#include "pptok/errors.hpp"
#include "pptok/features.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pptok {

enum class LocalDistance { euclidean, squared };

struct DtwAlignment {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> path;
  double cost = 0.0;
};

/// Classic DTW over rows with steps (1,0), (0,1), (1,1). The backtrace
/// prefers the diagonal, then (1,0), then (0,1) among equal-cost
/// predecessors.
template <typename DerivedA, typename DerivedB>
DtwAlignment dtw(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                 LocalDistance dist = LocalDistance::euclidean) {
  if (a.rows() == 0 || b.rows() == 0) throw EmptyInput("dtw needs non-empty sequences");
  if (a.cols() != b.cols())
    throw DimensionMismatch("dtw inputs have " + std::to_string(a.cols()) + " and " +
                            std::to_string(b.cols()) + " dims");
  const Eigen::Index n = a.rows(), m = b.rows();

  Eigen::MatrixXd local(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d2 = (a.row(i).template cast<double>() - b.row(j).template cast<double>())
                            .squaredNorm();
      local(i, j) = dist == LocalDistance::squared ? d2 : std::sqrt(d2);
    }

  Eigen::MatrixXd acc(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double best;
      if (i == 0 && j == 0) best = 0.0;
      else if (i == 0) best = acc(0, j - 1);
      else if (j == 0) best = acc(i - 1, 0);
      else best = std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
      acc(i, j) = best + local(i, j);
    }

  DtwAlignment out;
  out.cost = acc(n - 1, m - 1);
  Eigen::Index i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) --j;
    else if (j == 0) --i;
    else {
      const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (diag <= up && diag <= left) { --i; --j; }
      else if (up <= left) --i;
      else --j;
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

/// (10 / ln 10) * sqrt(2): dB scale for one unit of cepstral distance.
inline const double kMcdScale = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;

/// DTW over cepstral coefficients 1..n-1 (coefficient 0 excluded).
DtwAlignment cepstral_alignment(const FeatureMatrix& c1, const FeatureMatrix& c2);

/// Mel-cepstral distortion in dB averaged along the cepstral DTW path.
double mcd(const FeatureMatrix& c1, const FeatureMatrix& c2);

/// F0 RMSE in Hz over cepstral-DTW-aligned frame pairs where both frames
/// are voiced. Throws NoVoicedOverlap when no such pair exists.
double f0_rmse(const PitchTrack& f1, const FeatureMatrix& c1, const PitchTrack& f2,
               const FeatureMatrix& c2);

// ---------------------------------------------------------------------------
// BLEU

inline constexpr double kBleuEpsilon = 1e-9;

/// Sentence BLEU with uniform weights over n = 1..min(max_n, |candidate|),
/// clipped n-gram precisions, and the Papineni brevity penalty against the
/// closest reference length. A zero match count contributes
/// kBleuEpsilon / total instead of zero.
double bleu(std::span<const int> candidate, std::span<const std::vector<int>> references,
            int max_n = 4);

/// Mean BLEU of each sentence against all others, one score per sentence.
std::vector<double> self_bleu_scores(std::span<const std::vector<int>> corpus,
                                     int max_n = 4);
double self_bleu(std::span<const std::vector<int>> corpus, int max_n = 4);

struct BleuReport {
  std::vector<double> per_sentence_bleu;
  double self_bleu = 0.0;
  double self_bleu_gt = 0.0;
  double normalized = 0.0;
  /// Generations less diverse than the ground truth push the ratio above 1.
  bool exceeds_one = false;
  std::string smoothing = "epsilon-numerator 1e-9";
};

BleuReport normalized_self_bleu(std::span<const std::vector<int>> generated,
                                std::span<const std::vector<int>> ground_truth,
                                int max_n = 4);

}  // namespace pptok
