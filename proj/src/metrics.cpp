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

#include "pptok/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

namespace pptok {

DtwAlignment cepstral_alignment(const FeatureMatrix& c1, const FeatureMatrix& c2) {
  if (c1.dim() != c2.dim())
    throw DimensionMismatch("cepstra have " + std::to_string(c1.dim()) + " and " +
                            std::to_string(c2.dim()) + " coefficients");
  if (c1.dim() < 2)
    throw DimensionMismatch("need at least two cepstral coefficients");
  if (c1.frames() == 0 || c2.frames() == 0) throw EmptyInput("empty cepstra");
  const Eigen::Index d = c1.dim() - 1;
  return dtw(c1.data.rightCols(d), c2.data.rightCols(d), LocalDistance::euclidean);
}

double mcd(const FeatureMatrix& c1, const FeatureMatrix& c2) {
  const DtwAlignment align = cepstral_alignment(c1, c2);
  const Eigen::Index d = c1.dim() - 1;
  double total = 0.0;
  for (const auto& [i, j] : align.path)
    total += kMcdScale *
             (c1.data.row(i).tail(d) - c2.data.row(j).tail(d)).norm();
  return total / double(align.path.size());
}

double f0_rmse(const PitchTrack& f1, const FeatureMatrix& c1, const PitchTrack& f2,
               const FeatureMatrix& c2) {
  if (f1.frames() != c1.frames() || f2.frames() != c2.frames())
    throw DimensionMismatch("pitch tracks must have one value per cepstral frame");
  const DtwAlignment align = cepstral_alignment(c1, c2);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& [i, j] : align.path) {
    if (!f1.voiced[std::size_t(i)] || !f2.voiced[std::size_t(j)]) continue;
    const double diff = f1.f0[i] - f2.f0[j];
    sum += diff * diff;
    ++pairs;
  }
  if (pairs == 0) throw NoVoicedOverlap("no aligned frame pair is voiced on both sides");
  return std::sqrt(sum / double(pairs));
}

namespace {

using NgramCounts = std::map<std::vector<int>, int>;

// counts[n-1] holds the n-gram histogram of seq.
std::vector<NgramCounts> count_ngrams(std::span<const int> seq, int max_n) {
  std::vector<NgramCounts> counts(static_cast<std::size_t>(max_n));
  for (int n = 1; n <= max_n; ++n)
    for (std::size_t i = 0; i + std::size_t(n) <= seq.size(); ++i)
      ++counts[std::size_t(n - 1)][std::vector<int>(seq.begin() + std::ptrdiff_t(i),
                                                     seq.begin() + std::ptrdiff_t(i) + n)];
  return counts;
}

struct CountedSentence {
  std::size_t length = 0;
  std::vector<NgramCounts> counts;
};

template <typename RefRange>
double bleu_counted(const CountedSentence& cand, const RefRange& refs, int max_n) {
  const int orders = std::min<int>(max_n, int(cand.length));
  double log_sum = 0.0;
  for (int n = 1; n <= orders; ++n) {
    const auto& cand_counts = cand.counts[std::size_t(n - 1)];
    double clipped = 0.0;
    for (const auto& [gram, c] : cand_counts) {
      int best = 0;
      for (const CountedSentence* ref : refs) {
        const auto& rc = ref->counts[std::size_t(n - 1)];
        const auto it = rc.find(gram);
        if (it != rc.end()) best = std::max(best, it->second);
      }
      clipped += std::min(c, best);
    }
    const double total = double(cand.length) - n + 1;
    log_sum += std::log((clipped > 0.0 ? clipped : kBleuEpsilon) / total);
  }

  // Closest reference length, shorter one on ties.
  std::size_t closest = 0;
  bool first = true;
  for (const CountedSentence* ref : refs) {
    const auto gap = [&](std::size_t len) {
      return len > cand.length ? len - cand.length : cand.length - len;
    };
    if (first || gap(ref->length) < gap(closest) ||
        (gap(ref->length) == gap(closest) && ref->length < closest))
      closest = ref->length;
    first = false;
  }
  const double c = double(cand.length), r = double(closest);
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return brevity * std::exp(log_sum / orders);
}

CountedSentence counted(std::span<const int> seq, int max_n) {
  return {seq.size(), count_ngrams(seq, max_n)};
}

}  // namespace

double bleu(std::span<const int> candidate, std::span<const std::vector<int>> references,
            int max_n) {
  if (max_n < 1) throw ConfigError("max_n must be at least 1");
  if (references.empty()) throw EmptyReferenceSet("bleu needs at least one reference");
  if (candidate.empty()) throw EmptyInput("bleu candidate is empty");
  const CountedSentence cand = counted(candidate, max_n);
  std::vector<CountedSentence> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(counted(r, max_n));
  std::vector<const CountedSentence*> ptrs;
  for (const auto& r : refs) ptrs.push_back(&r);
  return bleu_counted(cand, ptrs, max_n);
}

std::vector<double> self_bleu_scores(std::span<const std::vector<int>> corpus, int max_n) {
  if (max_n < 1) throw ConfigError("max_n must be at least 1");
  if (corpus.size() < 2)
    throw CorpusTooSmall("self-BLEU needs at least two sentences, got " +
                         std::to_string(corpus.size()));
  std::vector<CountedSentence> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.push_back(counted(s, max_n));

  std::vector<double> scores(corpus.size(), 0.0);
  std::vector<const CountedSentence*> others;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    // An empty sentence matches nothing.
    if (sentences[i].length == 0) continue;
    others.clear();
    for (std::size_t j = 0; j < sentences.size(); ++j)
      if (j != i) others.push_back(&sentences[j]);
    scores[i] = bleu_counted(sentences[i], others, max_n);
  }
  return scores;
}

double self_bleu(std::span<const std::vector<int>> corpus, int max_n) {
  const std::vector<double> scores = self_bleu_scores(corpus, max_n);
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / double(scores.size());
}

BleuReport normalized_self_bleu(std::span<const std::vector<int>> generated,
                                std::span<const std::vector<int>> ground_truth,
                                int max_n) {
  BleuReport report;
  report.per_sentence_bleu = self_bleu_scores(generated, max_n);
  double sum = 0.0;
  for (double s : report.per_sentence_bleu) sum += s;
  report.self_bleu = sum / double(report.per_sentence_bleu.size());
  report.self_bleu_gt = self_bleu(ground_truth, max_n);
  if (!(report.self_bleu_gt > 0.0))
    throw DegenerateGroundTruth("ground-truth self-BLEU is zero");
  report.normalized = report.self_bleu / report.self_bleu_gt;
  report.exceeds_one = report.normalized > 1.0;
  return report;
}

}  // namespace pptok
