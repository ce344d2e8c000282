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

#include "pptok/kmeans.hpp"

#include "pptok/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace pptok {

void PointSet::add(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) return;
  if (dim_ >= 0 && points.cols() != dim_)
    throw DimensionMismatch("point set has " + std::to_string(dim_) +
                            " dims, got " + std::to_string(points.cols()));
  dim_ = points.cols();
  parts_.push_back(&points);
  offsets_.push_back(size() + points.rows());
}

Eigen::MatrixXd::ConstRowXpr PointSet::row(Eigen::Index i) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  const auto part = static_cast<std::size_t>(it - offsets_.begin());
  const Eigen::Index begin = part == 0 ? 0 : offsets_[part - 1];
  return parts_[part]->row(i - begin);
}

double inertia(const Codebook& cb, const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd c = cb.centroids.cast<double>();
  return inertia(points, c);
}

std::vector<int> assign(const Codebook& cb, const FeatureMatrix& features) {
  if (features.dim() != cb.dim())
    throw DimensionMismatch("features have " + std::to_string(features.dim()) +
                            " dims, codebook " + std::to_string(cb.dim()));
  const Eigen::MatrixXd c = cb.centroids.cast<double>();
  std::vector<int> labels(static_cast<std::size_t>(features.frames()));
  for (Eigen::Index t = 0; t < features.frames(); ++t)
    labels[static_cast<std::size_t>(t)] =
        static_cast<int>(nearest_centroid(features.data.row(t), c));
  return labels;
}

namespace {

using Rng = std::mt19937_64;

Eigen::Index count_distinct(const PointSet& points, const std::vector<Eigen::Index>& idx,
                            Eigen::Index enough) {
  std::set<std::vector<double>> seen;
  for (Eigen::Index i : idx) {
    const auto r = points.row(i);
    std::vector<double> v(static_cast<std::size_t>(r.size()));
    for (Eigen::Index j = 0; j < r.size(); ++j) v[static_cast<std::size_t>(j)] = r(j);
    seen.insert(std::move(v));
    if (Eigen::Index(seen.size()) >= enough) break;
  }
  return Eigen::Index(seen.size());
}

std::vector<Eigen::Index> reservoir_sample(Eigen::Index n, Eigen::Index m, Rng& rng) {
  std::vector<Eigen::Index> sample;
  if (m >= n) {
    sample.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sample[static_cast<std::size_t>(i)] = i;
    return sample;
  }
  sample.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) sample.push_back(i);
  for (Eigen::Index i = m; i < n; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    const Eigen::Index j = pick(rng);
    if (j < m) sample[static_cast<std::size_t>(j)] = i;
  }
  std::sort(sample.begin(), sample.end());
  return sample;
}

Eigen::MatrixXd kmeans_plus_plus(const PointSet& points,
                                 const std::vector<Eigen::Index>& sample, int k,
                                 Rng& rng) {
  const auto m = sample.size();
  Eigen::MatrixXd centroids(k, points.dim());
  std::uniform_int_distribution<std::size_t> first(0, m - 1);
  centroids.row(0) = points.row(sample[first(rng)]);

  std::vector<double> d2(m);
  for (std::size_t i = 0; i < m; ++i)
    d2[i] = (points.row(sample[i]) - centroids.row(0)).squaredNorm();

  // Greedy k-means++: several D^2-weighted candidates per step, keep the one
  // that lowers the potential most.
  const int trials = 2 + int(std::log(double(k)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cand_d2(m), best_d2(m);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    double best_pot = std::numeric_limits<double>::infinity();
    std::size_t best = m;
    for (int trial = 0; trial < trials; ++trial) {
      const double target = unit(rng) * total;
      std::size_t chosen = m;
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        chosen = i;
        if (acc > target) break;
      }
      double pot = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        cand_d2[i] =
            std::min(d2[i], (points.row(sample[i]) - points.row(sample[chosen])).squaredNorm());
        pot += cand_d2[i];
      }
      if (pot < best_pot) {
        best_pot = pot;
        best = chosen;
        best_d2.swap(cand_d2);
      }
    }
    centroids.row(c) = points.row(sample[best]);
    d2.swap(best_d2);
  }
  return centroids;
}

double full_inertia(const PointSet& points, const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    double d;
    nearest_centroid(points.row(i), centroids, &d);
    total += d;
  }
  return total;
}

}  // namespace

Codebook fit_minibatch_kmeans(const PointSet& points, const KMeansOptions& opts,
                              KMeansTrace* trace) {
  if (opts.k < 1) throw ConfigError("k must be at least 1");
  if (opts.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (opts.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  const Eigen::Index n = points.size();
  const Eigen::Index dim = points.dim();
  if (n == 0) throw InsufficientData("no points to cluster");

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  if (count_distinct(points, all, opts.k) < opts.k)
    throw InsufficientData("fewer than " + std::to_string(opts.k) + " distinct points");

  Rng rng(opts.seed);
  const Eigen::Index init_size =
      opts.init_size > 0 ? opts.init_size : 3 * Eigen::Index(opts.batch_size);
  std::vector<Eigen::Index> sample =
      reservoir_sample(n, std::max<Eigen::Index>(init_size, opts.k), rng);
  if (count_distinct(points, sample, opts.k) < opts.k) sample = all;

  Eigen::MatrixXd centroids = kmeans_plus_plus(points, sample, opts.k, rng);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(opts.k);

  const bool full_batch = opts.batch_size >= n;
  const Eigen::Index batch_len = full_batch ? n : opts.batch_size;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

  std::vector<Eigen::Index> batch(static_cast<std::size_t>(batch_len));
  std::vector<Eigen::Index> labels(batch.size());
  std::vector<double> dist(batch.size());
  Eigen::MatrixXd sums(opts.k, dim);
  Eigen::VectorXd batch_counts(opts.k);

  std::uint32_t iterations = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    for (std::size_t b = 0; b < batch.size(); ++b)
      batch[b] = full_batch ? Eigen::Index(b) : pick(rng);

    // Assignment against the centroids from the previous iteration.
    for (std::size_t b = 0; b < batch.size(); ++b)
      labels[b] = nearest_centroid(points.row(batch[b]), centroids, &dist[b]);

    sums.setZero();
    batch_counts.setZero();
    for (std::size_t b = 0; b < batch.size(); ++b) {
      sums.row(labels[b]) += points.row(batch[b]);
      batch_counts[labels[b]] += 1.0;
    }

    const Eigen::MatrixXd previous = centroids;
    for (int c = 0; c < opts.k; ++c) {
      if (batch_counts[c] == 0.0) continue;
      // Full batch is plain Lloyd; otherwise a per-centroid running mean.
      const double before = full_batch ? 0.0 : counts[c];
      counts[c] = before + batch_counts[c];
      centroids.row(c) = (previous.row(c) * before + sums.row(c)) / counts[c];
    }

    // Clusters that have never received a point (in full batch: that are
    // empty this round) move to the batch point farthest from its centroid.
    int reseeded = 0;
    for (int c = 0; c < opts.k; ++c) {
      if (full_batch ? batch_counts[c] > 0.0 : counts[c] > 0.0) continue;
      const auto far = std::max_element(dist.begin(), dist.end());
      if (far == dist.end() || *far <= 0.0) break;
      const auto b = static_cast<std::size_t>(far - dist.begin());
      centroids.row(c) = points.row(batch[b]);
      counts[c] = 1.0;
      *far = -1.0;
      ++reseeded;
    }

    ++iterations;
    const double shift = (centroids - previous).rowwise().norm().mean();
    if (trace) {
      trace->inertia.push_back(full_inertia(points, centroids));
      trace->displacement.push_back(shift);
      trace->reinitialized.push_back(reseeded);
    }
    if (shift < opts.tol) break;
  }

  Codebook cb;
  cb.centroids = centroids.cast<float>();
  cb.feature_kind = opts.feature_kind;
  cb.seed = opts.seed;
  cb.trained_iterations = iterations;
  return cb;
}

}  // namespace pptok
