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

#include "binary_io.hpp"

#include <cmath>
#include <fstream>

namespace pptok {

namespace {
constexpr std::uint32_t kPptcVersion = 1;
}

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MalformedFile("cannot write " + path.string());
  os.write("PPTC", 4);
  detail::put<std::uint32_t>(os, kPptcVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(cb.k()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(cb.dim()));
  detail::put<std::uint64_t>(os, cb.seed);
  detail::put<std::uint32_t>(os, cb.trained_iterations);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(cb.feature_kind));
  for (Eigen::Index k = 0; k < cb.k(); ++k)
    for (Eigen::Index d = 0; d < cb.dim(); ++d)
      detail::put<float>(os, cb.centroids(k, d));
  if (!os) throw MalformedFile("write failed: " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MalformedFile("cannot open " + ctx);
  detail::expect_magic(is, "PPTC", ctx);
  const auto version = detail::get<std::uint32_t>(is, ctx);
  if (version != kPptcVersion)
    throw VersionMismatch(ctx + ": PPTC version " + std::to_string(version));
  const auto k = detail::get<std::uint32_t>(is, ctx);
  const auto dim = detail::get<std::uint32_t>(is, ctx);
  if (k == 0) throw MalformedFile(ctx + ": empty codebook");

  Codebook cb;
  cb.seed = detail::get<std::uint64_t>(is, ctx);
  cb.trained_iterations = detail::get<std::uint32_t>(is, ctx);
  const auto kind = detail::get<std::uint8_t>(is, ctx);
  if (kind > static_cast<std::uint8_t>(FeatureKind::external))
    throw MalformedFile(ctx + ": unknown feature kind " + std::to_string(kind));
  cb.feature_kind = static_cast<FeatureKind>(kind);
  cb.centroids.resize(k, dim);
  for (Eigen::Index r = 0; r < cb.k(); ++r)
    for (Eigen::Index d = 0; d < cb.dim(); ++d) {
      const float v = detail::get<float>(is, ctx);
      if (!std::isfinite(v)) throw MalformedFile(ctx + ": non-finite centroid");
      cb.centroids(r, d) = v;
    }
  detail::expect_eof(is, ctx);
  return cb;
}

}  // namespace pptok
