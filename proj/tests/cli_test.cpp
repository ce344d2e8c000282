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

#include "pptok/pipeline.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>

using namespace pptok;
using namespace pptok::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Run pptok_cli(const std::string& args, const fs::path& scratch, const std::string& env = "") {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = env + " '" PPTOK_CLI "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Three tone classes, several speakers; splits assigned directly.
Manifest write_corpus(const fs::path& dir, int speakers, int per_speaker) {
  fs::create_directories(dir / "wav");
  const double f0s[] = {110.0, 180.0, 260.0};
  const double tilts[] = {0.5, 1.2, 2.0};
  Manifest m;
  int n = 0;
  for (int s = 0; s < speakers; ++s)
    for (int u = 0; u < per_speaker; ++u, ++n) {
      UtteranceRecord r;
      r.speaker = "s" + std::to_string(s);
      r.id = r.speaker + "u" + std::to_string(u);
      r.audio_path = "wav/" + r.id + ".wav";
      const int c = n % 3;
      const Waveform a = tone_complex(f0s[c], 0.4 + 0.1 * (u % 3), 15, tilts[c]);
      const Waveform b = tone_complex(f0s[(c + 1) % 3], 0.3, 15, tilts[(c + 1) % 3]);
      const Waveform w = concat(a, b);
      save_wav(dir / r.audio_path, w);
      r.duration_sec = w.duration_sec();
      r.has_pitch = true;
      r.split = u == 0 ? Split::test : Split::train;
      m.records.push_back(r);
    }
  save_manifest(dir / "manifest.jsonl", m);
  return m;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const auto dir = temp_dir("cli_usage");
  CHECK(pptok_cli("", dir).code == 2);
  CHECK(pptok_cli("frobnicate", dir).code == 2);
  CHECK(pptok_cli("ppl --lm", dir).code == 2);
  CHECK(pptok_cli("--k 0 ppl --lm a --tokens b", dir).code == 2);
  CHECK(pptok_cli("--smoothing bogus ppl --lm a --tokens b", dir).code == 2);
  CHECK(pptok_cli("ppl --lm " + q(dir / "none.pptl") + " --tokens x", dir).code == 1);
  CHECK(pptok_cli("--help", dir).code == 0);
}

TEST_CASE("extract: partial failure and frame counts") {
  const auto dir = temp_dir("cli_extract");
  fs::create_directories(dir / "wav");
  save_wav(dir / "wav/a.wav", sine(200.0, 1.0));
  save_wav(dir / "wav/b.wav", sine(300.0, 0.5));
  std::ofstream(dir / "wav/c.wav") << "not a wav";
  Manifest m;
  m.records = {{"a", "s", "wav/a.wav", 1.0, true},
               {"b", "s", "wav/b.wav", 0.5, true},
               {"c", "s", "wav/c.wav", 0.5, true}};
  save_manifest(dir / "m.jsonl", m);

  const Run r = pptok_cli("extract --manifest " + q(dir / "m.jsonl") + " --out-dir " +
                              q(dir / "feat"),
                          dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("c: MalformedWav") != std::string::npos);
  CHECK(r.err.find("1 of 3") != std::string::npos);
  const FeatureMatrix fa = read_features(dir / "feat/a.pptf");
  CHECK(fa.frames() == 50);
  CHECK(fa.dim() == 13);
  CHECK(fa.kind == FeatureKind::mel_cepstra);
  CHECK(read_features(dir / "feat/b.pptf").frames() == 25);
  CHECK_FALSE(fs::exists(dir / "feat/c.pptf"));

  const Run mel = pptok_cli("--n-mels 40 extract --kind mel_spectrogram --manifest " +
                                q(dir / "m.jsonl") + " --out-dir " + q(dir / "mel"),
                            dir);
  CHECK(mel.code == 1);
  CHECK(read_features(dir / "mel/a.pptf").dim() == 40);
}

TEST_CASE("pipeline commands agree with the library") {
  const auto dir = temp_dir("cli_pipeline");
  const Manifest m = write_corpus(dir, 6, 5);
  const fs::path man = dir / "manifest.jsonl";
  const std::string common = "--k 6 --order 3 --count 12 --max-len 60 --seed 5 ";

  REQUIRE(pptok_cli(common + "extract --manifest " + q(man) + " --out-dir " + q(dir / "f"), dir)
              .code == 0);
  REQUIRE(pptok_cli(common + "fit-kmeans --manifest " + q(man) + " --features " + q(dir / "f") +
                        " --out " + q(dir / "cb.pptc"),
                    dir)
              .code == 0);
  REQUIRE(pptok_cli(common + "tokenize --manifest " + q(man) + " --features " + q(dir / "f") +
                        " --codebook " + q(dir / "cb.pptc") + " --split train --out " +
                        q(dir / "train.tok"),
                    dir)
              .code == 0);
  REQUIRE(pptok_cli(common + "tokenize --manifest " + q(man) + " --features " + q(dir / "f") +
                        " --codebook " + q(dir / "cb.pptc") + " --split test --out " +
                        q(dir / "test.tok"),
                    dir)
              .code == 0);
  REQUIRE(pptok_cli(common + "train-lm --tokens " + q(dir / "train.tok") + " --codebook " +
                        q(dir / "cb.pptc") + " --out " + q(dir / "lm.pptl"),
                    dir)
              .code == 0);
  const Run ppl = pptok_cli(common + "ppl --lm " + q(dir / "lm.pptl") + " --tokens " +
                                q(dir / "test.tok"),
                            dir);
  REQUIRE(ppl.code == 0);
  REQUIRE(pptok_cli(common + "sample --lm " + q(dir / "lm.pptl") + " --out " + q(dir / "gen.tok"),
                    dir)
              .code == 0);

  // Same stages through the library.
  PipelineConfig cfg;
  cfg.k = 6;
  cfg.lm_order = 3;
  cfg.gen_count = 12;
  cfg.max_len = 60;
  cfg.seed = 5;
  cfg.validate();
  const auto train = load_feature_dir(dir / "f", ids_of(m.in_split(Split::train)));
  const auto test = load_feature_dir(dir / "f", ids_of(m.in_split(Split::test)));
  for (const auto& u : train) {
    const Waveform w = load_audio(dir / m.find(u.id)->audio_path, cfg);
    const FeatureMatrix direct = compute_features(w, FeatureKind::mel_cepstra, cfg);
    CHECK((direct.data.cast<float>().cast<double>() - u.features.data).cwiseAbs().maxCoeff() ==
          0.0);
  }
  const Codebook cb = fit_codebook(train, cfg);
  CHECK(load_codebook(dir / "cb.pptc").centroids == cb.centroids);
  const auto train_tok = tokenize_all(cb, train);
  const auto test_tok = tokenize_all(cb, test);
  const auto file_tok = read_token_file(dir / "train.tok");
  REQUIRE(file_tok.size() == train_tok.size());
  for (std::size_t i = 0; i < file_tok.size(); ++i) CHECK(file_tok[i].seq == train_tok[i].seq);
  const NGramModel lm = train_token_lm(train_tok, int(cb.k()), cfg);
  CHECK(NGramModel::load(dir / "lm.pptl") == lm);
  char buf[48];
  std::snprintf(buf, sizeof buf, "ppl=%.17g\n", perplexity(lm, token_sequences(test_tok)));
  CHECK(ppl.out == buf);
  const auto gen = generate_token_records(lm, cfg);
  CHECK(token_sequences(read_token_file(dir / "gen.tok")) == token_sequences(gen));

  SUBCASE("seed controls sampling, from the flag or the environment") {
    REQUIRE(pptok_cli(common + "sample --lm " + q(dir / "lm.pptl") + " --out " +
                          q(dir / "gen2.tok"),
                      dir)
                .code == 0);
    CHECK(slurp(dir / "gen.tok") == slurp(dir / "gen2.tok"));
    REQUIRE(pptok_cli("--count 12 --max-len 60 sample --lm " + q(dir / "lm.pptl") + " --out " +
                          q(dir / "gen3.tok"),
                      dir, "PPT_SEED=5")
                .code == 0);
    CHECK(slurp(dir / "gen.tok") == slurp(dir / "gen3.tok"));
    REQUIRE(pptok_cli("--count 12 --max-len 60 --seed 6 sample --lm " + q(dir / "lm.pptl") +
                          " --out " + q(dir / "gen4.tok"),
                      dir)
                .code == 0);
    CHECK(slurp(dir / "gen.tok") != slurp(dir / "gen4.tok"));
  }

  SUBCASE("config file supplies option values") {
    std::ofstream(dir / "cfg.toml") << "k = 3\nseed = 5\n";
    REQUIRE(pptok_cli("--config " + q(dir / "cfg.toml") + " fit-kmeans --manifest " + q(man) +
                          " --features " + q(dir / "f") + " --out " + q(dir / "cb3.pptc"),
                      dir)
                .code == 0);
    CHECK(load_codebook(dir / "cb3.pptc").k() == 3);
  }

  SUBCASE("ground truth evaluated against itself") {
    const Run r = pptok_cli(common + "eval --gt-manifest " + q(man) + " --gen-manifest " +
                                q(man) + " --gt-tokens " + q(dir / "test.tok") +
                                " --gen-tokens " + q(dir / "test.tok") + " --lm " +
                                q(dir / "lm.pptl") + " --out-json " + q(dir / "r.json"),
                            dir);
    REQUIRE(r.code == 0);
    const auto kv = parse_report(r.out);
    CHECK(std::stod(kv.at("mcd_db")) == 0.0);
    CHECK(std::stod(kv.at("f0_rmse_hz")) == 0.0);
    CHECK(std::stod(kv.at("normalized_self_bleu")) == doctest::Approx(1.0));
    CHECK(kv.at("ppl") == ppl.out.substr(4, ppl.out.size() - 5));
    CHECK(kv.at("mcd_pairs") == "6");
    CHECK(slurp(dir / "r.json").find("\"mcd_db\": 0.0") != std::string::npos);
  }

  SUBCASE("mismatched ids are an error") {
    std::vector<TokenRecord> partial = read_token_file(dir / "test.tok");
    partial.pop_back();
    write_token_file(dir / "partial.tok", partial);
    const Run r = pptok_cli("eval --gt-manifest " + q(man) + " --gt-tokens " +
                                q(dir / "partial.tok"),
                            dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("IdMismatch") != std::string::npos);

    Manifest gen = m;
    gen.records.erase(gen.records.begin());
    save_manifest(dir / "gen.jsonl", gen);
    const Run a = pptok_cli("eval --gt-manifest " + q(man) + " --gen-manifest " +
                                q(dir / "gen.jsonl"),
                            dir);
    CHECK(a.code == 1);
    CHECK(a.err.find("IdMismatch") != std::string::npos);
  }
}

TEST_CASE("sweep over feature layers") {
  const auto dir = temp_dir("cli_sweep");
  const Manifest m = write_corpus(dir, 6, 5);
  const fs::path man = dir / "manifest.jsonl";
  REQUIRE(pptok_cli("extract --manifest " + q(man) + " --out-dir " + q(dir / "cep"), dir).code ==
          0);
  // A layer of unstructured features with the same shapes.
  fs::create_directories(dir / "noise");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (const auto& r : m.records) {
    FeatureMatrix f = read_features(dir / "cep" / (r.id + ".pptf"));
    for (Eigen::Index i = 0; i < f.data.size(); ++i) f.data.data()[i] = g(rng);
    f.kind = FeatureKind::external;
    write_features(dir / "noise" / (r.id + ".pptf"), f);
  }

  const std::string common = "--k 8 --order 3 --count 20 --max-len 80 ";
  const Run r = pptok_cli(common + "sweep --manifest " + q(man) + " --features " +
                              q(dir / "cep") + " " + q(dir / "noise") + " --out " +
                              q(dir / "sweep.tsv"),
                          dir);
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "sweep.tsv") == r.out);
  std::istringstream is(r.out);
  std::string header, l1, l2, extra;
  std::getline(is, header);
  std::getline(is, l1);
  std::getline(is, l2);
  CHECK_FALSE(std::getline(is, extra));
  CHECK(header.substr(0, 12) == "layer\tsource");
  auto ppl_of = [](const std::string& line) {
    std::istringstream ls(line);
    std::string layer, src, ppl;
    std::getline(ls, layer, '\t');
    std::getline(ls, src, '\t');
    std::getline(ls, ppl, '\t');
    return std::stod(ppl);
  };
  CHECK(l1.substr(0, 2) == "1\t");
  CHECK(l2.substr(0, 2) == "2\t");
  CHECK(ppl_of(l1) < ppl_of(l2));

  const Run single = pptok_cli(common + "sweep --manifest " + q(man) + " --features " +
                                   q(dir / "cep"),
                               dir);
  CHECK(single.code == 0);
  CHECK(std::count(single.out.begin(), single.out.end(), '\n') == 2);

  fs::create_directories(dir / "empty");
  const Run empty = pptok_cli(common + "sweep --manifest " + q(man) + " --features " +
                                  q(dir / "empty"),
                              dir);
  CHECK(empty.code == 1);
  CHECK(empty.err.find("MissingFeatures") != std::string::npos);
}
