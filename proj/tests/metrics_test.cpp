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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pptok/errors.hpp"
#include "pptok/metrics.hpp"
#include "support.hpp"

#include <algorithm>

using namespace pptok;
using namespace pptok::testing;

namespace {

using Corpus = std::vector<std::vector<int>>;

// Reference BLEU written from the textbook definition, string-keyed.
double oracle_bleu(const std::vector<int>& cand, const Corpus& refs) {
  auto grams = [](const std::vector<int>& s, std::size_t n) {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      std::string key;
      for (std::size_t j = 0; j < n; ++j) key += std::to_string(s[i + j]) + ".";
      ++out[key];
    }
    return out;
  };
  const std::size_t orders = std::min<std::size_t>(4, cand.size());
  double prod = 1.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    int match = 0;
    for (const auto& [g, c] : grams(cand, n)) {
      int cap = 0;
      for (const auto& r : refs) {
        const auto rg = grams(r, n);
        if (rg.count(g)) cap = std::max(cap, rg.at(g));
      }
      match += std::min(c, cap);
    }
    const double total = double(cand.size() - n + 1);
    prod *= (match > 0 ? match : 1e-9) / total;
  }
  std::size_t best = refs[0].size();
  for (const auto& r : refs) {
    const long d = std::labs(long(r.size()) - long(cand.size()));
    const long bd = std::labs(long(best) - long(cand.size()));
    if (d < bd || (d == bd && r.size() < best)) best = r.size();
  }
  const double bp =
      cand.size() > best ? 1.0 : std::exp(1.0 - double(best) / double(cand.size()));
  return bp * std::pow(prod, 1.0 / double(orders));
}

double oracle_self_bleu(const Corpus& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Corpus others;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (j != i) others.push_back(c[j]);
    sum += oracle_bleu(c[i], others);
  }
  return sum / double(c.size());
}

FeatureMatrix cepstra(const Eigen::MatrixXd& m) {
  FeatureMatrix f;
  f.data = m;
  f.kind = FeatureKind::mel_cepstra;
  return f;
}

PitchTrack track(std::initializer_list<double> f0) {
  PitchTrack p;
  p.f0 = Eigen::Map<const Eigen::VectorXd>(f0.begin(), Eigen::Index(f0.size()));
  for (double v : f0) p.voiced.push_back(v > 0.0);
  return p;
}

}  // namespace

TEST_CASE("dtw basics") {
  Eigen::MatrixXd a(4, 2);
  a << 0, 0, 1, 0, 2, 1, 3, 3;
  SUBCASE("identity") {
    const DtwAlignment al = dtw(a, a);
    CHECK(al.cost == 0.0);
    REQUIRE(al.path.size() == 4);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(al.path[std::size_t(i)] == std::pair{i, i});
  }
  SUBCASE("repeated frames cost nothing") {
    Eigen::MatrixXd b(6, 2);
    b << a.row(0), a.row(1), a.row(1), a.row(2), a.row(3), a.row(3);
    const DtwAlignment al = dtw(a, b);
    CHECK(al.cost == 0.0);
    CHECK(al.path.front() == std::pair<Eigen::Index, Eigen::Index>{0, 0});
    CHECK(al.path.back() == std::pair<Eigen::Index, Eigen::Index>{3, 5});
    CHECK(al.path.size() == 6);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(dtw(a, Eigen::MatrixXd(0, 2)), EmptyInput);
    CHECK_THROWS_AS(dtw(a, Eigen::MatrixXd::Zero(3, 3)), DimensionMismatch);
  }
}

TEST_CASE("dtw matches exhaustive path enumeration") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> len(1, 6), val(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a(len(rng), 2), b(len(rng), 2);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = val(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = val(rng);
    // Integer features with squared distance: every sum is exact.
    const DtwAlignment al = dtw(a, b, LocalDistance::squared);
    CHECK(al.cost == brute_force_dtw(a, b, true));
    CHECK(dtw(b, a, LocalDistance::squared).cost == al.cost);
    CHECK(dtw(a, b).cost == doctest::Approx(brute_force_dtw(a, b, false)).epsilon(1e-12));

    // The path is monotone, contiguous and reproduces the cost.
    double along = 0.0;
    for (std::size_t k = 0; k < al.path.size(); ++k) {
      const auto [i, j] = al.path[k];
      along += (a.row(i) - b.row(j)).squaredNorm();
      if (k > 0) {
        const auto [pi, pj] = al.path[k - 1];
        CHECK(i - pi >= 0);
        CHECK(j - pj >= 0);
        CHECK(i - pi + j - pj >= 1);
        CHECK(i - pi <= 1);
        CHECK(j - pj <= 1);
      }
    }
    CHECK(along == al.cost);
  }
}

TEST_CASE("mcd") {
  SUBCASE("one frame at unit distance is the dB scale factor") {
    Eigen::MatrixXd x(1, 3), y(1, 3);
    x << 5.0, 0.0, 0.0;
    y << -7.0, 0.6, 0.8;
    CHECK(mcd(cepstra(x), cepstra(y)) == doctest::Approx(6.1418).epsilon(1e-4));
    CHECK(kMcdScale == doctest::Approx(10.0 / std::log(10.0) * std::sqrt(2.0)));
  }
  SUBCASE("five frames, constant offset, c0 ignored") {
    Eigen::MatrixXd x(5, 4);
    x << 0, 0, 0, 0,  //
        1, 10, 0, 0,  //
        2, 20, 0, 0,  //
        3, 30, 5, 0,  //
        4, 40, 5, 5;
    Eigen::MatrixXd y = x;
    y.col(0).setConstant(100.0);
    y.col(2).array() += 0.3;
    y.col(3).array() -= 0.4;
    const double expect = kMcdScale * 0.5;
    CHECK(mcd(cepstra(x), cepstra(y)) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(mcd(cepstra(x), cepstra(x)) == 0.0);
  }
  SUBCASE("symmetric") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(9, 13), y = Eigen::MatrixXd::Random(7, 13);
    CHECK(mcd(cepstra(x), cepstra(y)) == doctest::Approx(mcd(cepstra(y), cepstra(x))));
  }
  CHECK_THROWS_AS(mcd(cepstra(Eigen::MatrixXd::Zero(2, 1)), cepstra(Eigen::MatrixXd::Zero(2, 1))),
                  DimensionMismatch);
}

TEST_CASE("f0_rmse") {
  Eigen::MatrixXd c(3, 3);
  c << 0, 0, 0, 0, 5, 0, 0, 10, 10;
  SUBCASE("constant offset") {
    CHECK(f0_rmse(track({100, 150, 200}), cepstra(c), track({110, 160, 210}), cepstra(c)) ==
          doctest::Approx(10.0));
  }
  SUBCASE("one deviating frame") {
    CHECK(f0_rmse(track({100, 150, 200}), cepstra(c), track({105, 150, 200}), cepstra(c)) ==
          doctest::Approx(std::sqrt(25.0 / 3.0)));
  }
  SUBCASE("only frames voiced on both sides count") {
    CHECK(f0_rmse(track({100, 0, 200}), cepstra(c), track({0, 150, 204}), cepstra(c)) ==
          doctest::Approx(4.0));
  }
  SUBCASE("no overlap") {
    CHECK_THROWS_AS(
        f0_rmse(track({100, 0, 0}), cepstra(c), track({0, 150, 0}), cepstra(c)),
        NoVoicedOverlap);
  }
  CHECK_THROWS_AS(f0_rmse(track({100, 1}), cepstra(c), track({1, 1, 1}), cepstra(c)),
                  DimensionMismatch);
}

TEST_CASE("bleu by hand") {
  const std::vector<int> cand{1, 2, 3, 4, 5};
  const Corpus refs{{1, 2, 3, 9, 5}};
  const double expect = std::pow(4.0 / 5 * 2.0 / 4 * 1.0 / 3 * (1e-9 / 2), 0.25);
  CHECK(bleu(cand, refs) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bleu(cand, Corpus{cand}) == 1.0);

  // short candidate: only the orders it has are averaged
  CHECK(bleu(std::vector<int>{4, 5}, Corpus{{4, 5}}) == 1.0);
  // brevity penalty against the closest length
  CHECK(bleu(std::vector<int>{1, 2, 3}, Corpus{{1, 2, 3, 4, 5, 6}}) ==
        doctest::Approx(std::exp(1.0 - 2.0)));
  CHECK_THROWS_AS(bleu(cand, Corpus{}), EmptyReferenceSet);
  CHECK_THROWS_AS(bleu(std::vector<int>{}, refs), EmptyInput);
}

TEST_CASE("bleu against the reference implementation") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 12), tok(0, 3), nrefs(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    auto draw = [&] {
      std::vector<int> s(static_cast<std::size_t>(len(rng)));
      for (int& t : s) t = tok(rng);
      return s;
    };
    const std::vector<int> cand = draw();
    Corpus refs;
    for (int r = nrefs(rng); r > 0; --r) refs.push_back(draw());
    CHECK(bleu(cand, refs) == doctest::Approx(oracle_bleu(cand, refs)).epsilon(1e-12));
  }
}

TEST_CASE("self-bleu") {
  SUBCASE("identical sentences") {
    const Corpus c(5, std::vector<int>{3, 1, 4, 1, 5, 9});
    CHECK(self_bleu(c) == doctest::Approx(1.0));
  }
  SUBCASE("disjoint vocabularies") {
    const Corpus c{{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}};
    CHECK(self_bleu(c) < 1e-6);
  }
  SUBCASE("toy corpus against the reference implementation") {
    const Corpus c{{1, 2, 3, 4, 5}, {1, 2, 3, 6, 7}, {2, 3, 4, 5, 1}};
    CHECK(self_bleu(c) == doctest::Approx(oracle_self_bleu(c)).epsilon(1e-12));
    const auto scores = self_bleu_scores(c);
    CHECK(scores.size() == 3);
  }
  SUBCASE("order of sentences is irrelevant") {
    Corpus c{{1, 2, 3, 4, 5}, {1, 2, 2, 6}, {2, 3, 4, 5, 1, 1}, {7, 1, 2}};
    const double base = self_bleu(c);
    std::sort(c.begin(), c.end());
    do {
      CHECK(self_bleu(c) == doctest::Approx(base).epsilon(1e-12));
    } while (std::next_permutation(c.begin(), c.end()));
  }
  SUBCASE("empty sentences score zero") {
    const Corpus c{{}, {1, 2}, {1, 2}};
    const auto s = self_bleu_scores(c);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 1.0);
  }
  CHECK_THROWS_AS(self_bleu(Corpus{{1, 2}}), CorpusTooSmall);
}

TEST_CASE("normalized self-bleu") {
  const Corpus gt{{1, 2, 3, 4, 5}, {1, 2, 3, 6, 7}, {2, 3, 4, 5, 1}};
  SUBCASE("generated equal to ground truth is one") {
    const BleuReport r = normalized_self_bleu(gt, gt);
    CHECK(r.normalized == doctest::Approx(1.0));
    CHECK_FALSE(r.exceeds_one);
    CHECK(r.per_sentence_bleu.size() == 3);
  }
  SUBCASE("repetitive generations exceed one and are flagged") {
    const Corpus gen(4, std::vector<int>{1, 2, 3, 4, 5});
    const BleuReport r = normalized_self_bleu(gen, gt);
    CHECK(r.normalized == doctest::Approx(1.0 / oracle_self_bleu(gt)));
    CHECK(r.exceeds_one);
  }
  SUBCASE("diverse generations fall below one") {
    const Corpus gen{{9, 8, 7}, {6, 5, 4, 3}, {11, 12, 13}};
    const BleuReport r = normalized_self_bleu(gen, gt);
    CHECK(r.normalized < 1e-3);
  }
  SUBCASE("ground truth with zero self-bleu") {
    const Corpus empty{{}, {}};
    CHECK_THROWS_AS(normalized_self_bleu(gt, empty), DegenerateGroundTruth);
  }
}
