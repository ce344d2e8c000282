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

#include "binary_io.hpp"

#include <cmath>
#include <fstream>

namespace pptok {

namespace {
constexpr std::uint32_t kPptfVersion = 1;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MalformedFile("cannot write " + path.string());
  os.write("PPTF", 4);
  detail::put<std::uint32_t>(os, kPptfVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.frames()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.dim()));
  detail::put<float>(os, static_cast<float>(f.frame_rate));
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(f.kind));
  for (Eigen::Index t = 0; t < f.frames(); ++t)
    for (Eigen::Index d = 0; d < f.dim(); ++d)
      detail::put<float>(os, static_cast<float>(f.data(t, d)));
  if (!os) throw MalformedFile("write failed: " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MalformedFile("cannot open " + ctx);
  detail::expect_magic(is, "PPTF", ctx);
  const auto version = detail::get<std::uint32_t>(is, ctx);
  if (version != kPptfVersion)
    throw VersionMismatch(ctx + ": PPTF version " + std::to_string(version));
  const auto frames = detail::get<std::uint32_t>(is, ctx);
  const auto dim = detail::get<std::uint32_t>(is, ctx);
  const auto rate = detail::get<float>(is, ctx);
  const auto kind = detail::get<std::uint8_t>(is, ctx);
  if (kind > static_cast<std::uint8_t>(FeatureKind::external))
    throw MalformedFile(ctx + ": unknown feature kind " + std::to_string(kind));

  FeatureMatrix f;
  f.frame_rate = rate;
  f.kind = static_cast<FeatureKind>(kind);
  f.hop = rate > 0.0f ? int(std::lround(16000.0 / rate)) : 0;
  f.data.resize(frames, dim);
  for (Eigen::Index t = 0; t < f.data.rows(); ++t)
    for (Eigen::Index d = 0; d < f.data.cols(); ++d) {
      const float v = detail::get<float>(is, ctx);
      if (!std::isfinite(v)) throw MalformedFile(ctx + ": non-finite entry");
      f.data(t, d) = v;
    }
  detail::expect_eof(is, ctx);
  return f;
}

}  // namespace pptok
