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

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace pptok {

/// K x D centroid matrix; the token inventory. Centroids are held at f32
/// precision so that the on-disk form is exact.
struct Codebook {
  Eigen::MatrixXf centroids;
  FeatureKind feature_kind = FeatureKind::external;
  std::uint64_t seed = 0;
  std::uint32_t trained_iterations = 0;

  Eigen::Index k() const { return centroids.rows(); }
  Eigen::Index dim() const { return centroids.cols(); }
};

/// Index of the nearest centroid by squared Euclidean distance. Ties go to
/// the lowest index. Optionally reports the winning distance.
template <typename Point, typename Centroids>
Eigen::Index nearest_centroid(const Eigen::MatrixBase<Point>& x,
                              const Eigen::MatrixBase<Centroids>& centroids,
                              double* distance = nullptr) {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
      const double diff = double(x(j)) - double(centroids(k, j));
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (distance) *distance = best_d;
  return best;
}

/// Sum over rows of the squared distance to the nearest centroid.
template <typename Points, typename Centroids>
double inertia(const Eigen::MatrixBase<Points>& points,
               const Eigen::MatrixBase<Centroids>& centroids) {
  if (points.cols() != centroids.cols())
    throw DimensionMismatch("points have " + std::to_string(points.cols()) +
                            " dims, centroids " + std::to_string(centroids.cols()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double d;
    nearest_centroid(points.row(i), centroids, &d);
    total += d;
  }
  return total;
}

double inertia(const Codebook& cb, const Eigen::MatrixXd& points);

/// Per-frame nearest-centroid index.
std::vector<int> assign(const Codebook& cb, const FeatureMatrix& features);

/// Non-owning view that stacks several matrices (one per utterance) into a
/// single point set without copying. The viewed matrices must outlive it.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(const Eigen::MatrixXd& points) { add(points); }

  void add(const Eigen::MatrixXd& points);

  Eigen::Index size() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Eigen::Index dim() const { return dim_; }
  Eigen::MatrixXd::ConstRowXpr row(Eigen::Index i) const;

 private:
  std::vector<const Eigen::MatrixXd*> parts_;
  std::vector<Eigen::Index> offsets_;  // running end offsets
  Eigen::Index dim_ = -1;
};

struct KMeansOptions {
  int k = 200;
  int batch_size = 10000;
  int max_iters = 300;
  double tol = 1e-4;  // mean centroid displacement
  std::uint64_t seed = 0;
  /// Reservoir size for k-means++ seeding; 0 means 3 * batch_size.
  int init_size = 0;
  FeatureKind feature_kind = FeatureKind::external;
};

/// Per-iteration diagnostics, filled only when requested.
struct KMeansTrace {
  std::vector<double> inertia;       // over the full point set
  std::vector<double> displacement;  // mean centroid shift
  std::vector<int> reinitialized;    // empty clusters reseeded per iteration
};

/// Mini-batch k-means with k-means++ seeding. When batch_size covers the
/// whole point set every iteration uses all points in order.
Codebook fit_minibatch_kmeans(const PointSet& points, const KMeansOptions& opts,
                              KMeansTrace* trace = nullptr);

void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace pptok
