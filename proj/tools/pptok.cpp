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

// pptok: command line front end for the token pipeline.
//
//   pptok extract      manifest audio -> PPTF feature files
//   pptok fit-kmeans   train-split features -> PPTC codebook
//   pptok tokenize     features + codebook -> token file
//   pptok train-lm     token file -> PPTL model
//   pptok ppl          model + token file -> perplexity
//   pptok sample       model -> generated token file
//   pptok eval         paired audio and/or token files -> metrics report
//   pptok sweep        one feature directory per layer -> table
//   pptok make-splits  manifest -> manifest with train/valid/test
//   pptok filter       manifest -> manifest with exclusions marked
//
// Shared settings may come from flags, from a TOML file given with
// --config, or (seed only) from the PPT_SEED environment variable.
// Exit status: 0 success, 1 failure (including partial per-file failure),
// 2 usage or configuration error.

#include "pptok/errors.hpp"
#include "pptok/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace pptok;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void log(const std::string& msg) { std::cerr << "pptok: " << msg << '\n'; }

std::vector<const UtteranceRecord*> select(const Manifest& m, const std::string& split) {
  if (split == "all") {
    std::vector<const UtteranceRecord*> out;
    for (const auto& r : m.records)
      if (r.split != Split::excluded) out.push_back(&r);
    return out;
  }
  return m.in_split(split_from_string(split));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw MalformedFile("cannot write " + path.string());
  os << text;
}

struct Options {
  PipelineConfig cfg;
  std::string smoothing = "kn";
  double discount = 0.75;
  double add_k = 1.0;

  // per-command
  std::string manifest, out, out_dir, features, kind = "mel_cepstra", split;
  std::string codebook, tokens, lm, gen_manifest, gt_tokens, gen_tokens, out_json;
  std::vector<std::string> feature_dirs;
  bool no_durations = false;
  bool probe = false;
  int vocab_size = 0;
  double max_duration = 20.0;
  SplitOptions splits;
};

int report_failures(const std::vector<StageFailure>& failures, std::size_t total) {
  for (const auto& f : failures) log(f.id + ": " + f.message);
  if (!failures.empty()) {
    log(std::to_string(failures.size()) + " of " + std::to_string(total) + " utterances failed");
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_extract(const Options& o) {
  const Manifest m = load_manifest(o.manifest);
  const auto records = select(m, o.split.empty() ? "all" : o.split);
  const auto failures = extract_features(records, fs::path(o.manifest).parent_path(),
                                         o.out_dir, feature_kind_from_string(o.kind), o.cfg);
  log("extracted " + std::to_string(records.size() - failures.size()) + " feature files");
  return report_failures(failures, records.size());
}

int cmd_fit_kmeans(const Options& o) {
  const Manifest m = load_manifest(o.manifest);
  const auto utts = load_feature_dir(o.features, ids_of(select(m, o.split.empty() ? "train" : o.split)));
  const Codebook cb = fit_codebook(utts, o.cfg);
  save_codebook(o.out, cb);
  log("codebook K=" + std::to_string(cb.k()) + " D=" + std::to_string(cb.dim()) + " after " +
      std::to_string(cb.trained_iterations) + " iterations");
  return kExitOk;
}

int cmd_tokenize(const Options& o) {
  const Manifest m = load_manifest(o.manifest);
  const Codebook cb = load_codebook(o.codebook);
  const auto utts = load_feature_dir(o.features, ids_of(select(m, o.split.empty() ? "all" : o.split)));
  const auto records = tokenize_all(cb, utts, o.cfg.jobs);
  write_token_file(o.out, records, !o.no_durations);
  return kExitOk;
}

int cmd_train_lm(const Options& o) {
  int vocab = o.vocab_size;
  if (!o.codebook.empty()) vocab = int(load_codebook(o.codebook).k());
  if (vocab < 1) throw ConfigError("give --vocab-size or --codebook");
  const auto records = read_token_file(o.tokens);
  const NGramModel lm = train_token_lm(records, vocab, o.cfg);
  lm.save(o.out);
  return kExitOk;
}

int cmd_ppl(const Options& o) {
  const NGramModel lm = NGramModel::load(o.lm);
  const auto records = read_token_file(o.tokens);
  const double ppl = perplexity(lm, token_sequences(records));
  char buf[48];
  std::snprintf(buf, sizeof buf, "ppl=%.17g\n", ppl);
  std::cout << buf;
  return kExitOk;
}

int cmd_sample(const Options& o) {
  const NGramModel lm = NGramModel::load(o.lm);
  const auto records = generate_token_records(lm, o.cfg);
  write_token_file(o.out, records, false);
  return kExitOk;
}

int cmd_eval(const Options& o) {
  // Test split when the manifest has one, else every usable record.
  auto eval_records = [](const Manifest& m) {
    auto records = m.in_split(Split::test);
    return records.empty() ? select(m, "all") : records;
  };
  MetricsReport report;
  const Manifest gt = load_manifest(o.manifest);
  const auto gt_records = eval_records(gt);
  const auto gt_ids = ids_of(gt_records);

  if (!o.gen_manifest.empty()) {
    const Manifest gen = load_manifest(o.gen_manifest);
    evaluate_audio_pairs(gt_records, fs::path(o.manifest).parent_path(), eval_records(gen),
                         fs::path(o.gen_manifest).parent_path(), o.cfg, report);
  }

  std::vector<std::vector<int>> gt_seqs;
  if (!o.gt_tokens.empty()) {
    const auto records = read_token_file(o.gt_tokens);
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.id);
    require_same_ids(gt_ids, ids, "ground-truth token file");
    gt_seqs = token_sequences(records);
  }
  if (!o.lm.empty()) {
    if (gt_seqs.empty()) throw ConfigError("--lm needs --gt-tokens");
    report.ppl = perplexity(NGramModel::load(o.lm), gt_seqs);
  }
  if (!o.gen_tokens.empty()) {
    if (gt_seqs.empty()) throw ConfigError("--gen-tokens needs --gt-tokens");
    evaluate_token_diversity(token_sequences(read_token_file(o.gen_tokens)), gt_seqs, report);
    if (report.normalized_exceeds_one)
      log("normalized Self-BLEU above 1: generations less diverse than ground truth");
  }

  if (!o.out.empty()) write_text(o.out, report.to_text());
  if (!o.out_json.empty()) write_text(o.out_json, report.to_json());
  std::cout << report.to_text();
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const Manifest m = load_manifest(o.manifest);
  std::vector<fs::path> dirs(o.feature_dirs.begin(), o.feature_dirs.end());
  const std::string table = sweep_table(sweep(dirs, m, o.cfg));
  if (!o.out.empty()) write_text(o.out, table);
  std::cout << table;
  return kExitOk;
}

int cmd_make_splits(const Options& o) {
  SplitOptions so = o.splits;
  so.seed = o.cfg.seed;
  const Manifest out = make_splits(load_manifest(o.manifest), so);
  save_manifest(o.out, out);
  const ManifestStats s = out.stats();
  auto count = [&](Split sp) { return s.per_split.count(sp) ? s.per_split.at(sp) : 0; };
  log("train/valid/test = " + std::to_string(count(Split::train)) + "/" +
      std::to_string(count(Split::valid)) + "/" + std::to_string(count(Split::test)));
  return kExitOk;
}

int cmd_filter(const Options& o) {
  Manifest m = load_manifest(o.manifest);
  std::vector<StageFailure> failures;
  if (o.probe) m = probe_audio(m, fs::path(o.manifest).parent_path(), o.cfg, &failures);
  const Manifest out = filter_utterances(m, o.max_duration);
  save_manifest(o.out, out);
  const ManifestStats s = out.stats(o.max_duration);
  log("excluded: " + std::to_string(s.too_long) + " too long, " +
      std::to_string(s.no_pitch) + " without pitch");
  return report_failures(failures, m.records.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo phonetic token pipeline"};
  app.set_config("--config", "", "TOML file with option overrides");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  PipelineConfig& c = o.cfg;
  app.add_option("--sample-rate", c.sample_rate, "Analysis sample rate (Hz)")->capture_default_str();
  app.add_option("--hop", c.hop, "Hop length (samples)")->capture_default_str();
  app.add_option("--n-fft", c.mel.n_fft)->capture_default_str();
  app.add_option("--win", c.mel.win)->capture_default_str();
  app.add_option("--n-mels", c.mel.n_mels)->capture_default_str();
  app.add_option("--fmin", c.mel.fmin)->capture_default_str();
  app.add_option("--fmax", c.mel.fmax)->capture_default_str();
  app.add_option("--n-coef", c.n_coef, "Mel-cepstral coefficients")->capture_default_str();
  app.add_option("--f0-min", c.pitch.fmin)->capture_default_str();
  app.add_option("--f0-max", c.pitch.fmax)->capture_default_str();
  app.add_option("--voicing-threshold", c.pitch.voicing_threshold)->capture_default_str();
  app.add_option("--k", c.k, "Codebook size")->capture_default_str();
  app.add_option("--batch-size", c.kmeans_batch, "k-means mini-batch size")->capture_default_str();
  app.add_option("--max-iters", c.kmeans_max_iters)->capture_default_str();
  app.add_option("--tol", c.kmeans_tol)->capture_default_str();
  app.add_option("--order", c.lm_order, "Token LM order")->capture_default_str();
  app.add_option("--smoothing", o.smoothing, "kn or addk")
      ->check(CLI::IsMember({"kn", "addk"}))->capture_default_str();
  app.add_option("--discount", o.discount, "Kneser-Ney discount")->capture_default_str();
  app.add_option("--add-k", o.add_k, "Additive smoothing constant")->capture_default_str();
  app.add_option("--temperature", c.temperature)->capture_default_str();
  app.add_option("--count", c.gen_count, "Sequences to generate")->capture_default_str();
  app.add_option("--max-len", c.max_len)->capture_default_str();
  auto* seed_opt = app.add_option("--seed", c.seed, "Random seed (falls back to PPT_SEED)");
  app.add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();

  auto* extract = app.add_subcommand("extract", "Compute PPTF features for manifest audio");
  extract->add_option("--manifest", o.manifest)->required();
  extract->add_option("--out-dir", o.out_dir)->required();
  extract->add_option("--kind", o.kind)->check(CLI::IsMember({"mel_cepstra", "mel_spectrogram"}));
  extract->add_option("--split", o.split, "all, train, valid or test");

  auto* fit = app.add_subcommand("fit-kmeans", "Fit a codebook on train-split features");
  fit->add_option("--manifest", o.manifest)->required();
  fit->add_option("--features", o.features)->required();
  fit->add_option("--split", o.split, "Split to fit on (default train)");
  fit->add_option("--out", o.out)->required();

  auto* tok = app.add_subcommand("tokenize", "Convert features into token/duration sequences");
  tok->add_option("--manifest", o.manifest)->required();
  tok->add_option("--features", o.features)->required();
  tok->add_option("--codebook", o.codebook)->required();
  tok->add_option("--split", o.split);
  tok->add_option("--out", o.out)->required();
  tok->add_flag("--no-durations", o.no_durations);

  auto* train = app.add_subcommand("train-lm", "Train the token language model");
  train->add_option("--tokens", o.tokens)->required();
  train->add_option("--vocab-size", o.vocab_size);
  train->add_option("--codebook", o.codebook);
  train->add_option("--out", o.out)->required();

  auto* ppl = app.add_subcommand("ppl", "Perplexity of a token file");
  ppl->add_option("--lm", o.lm)->required();
  ppl->add_option("--tokens", o.tokens)->required();

  auto* samp = app.add_subcommand("sample", "Generate token sequences");
  samp->add_option("--lm", o.lm)->required();
  samp->add_option("--out", o.out)->required();

  auto* ev = app.add_subcommand("eval", "Objective metrics report");
  ev->add_option("--gt-manifest", o.manifest)->required();
  ev->add_option("--gen-manifest", o.gen_manifest, "Generated audio paired by id");
  ev->add_option("--gt-tokens", o.gt_tokens);
  ev->add_option("--gen-tokens", o.gen_tokens);
  ev->add_option("--lm", o.lm);
  ev->add_option("--out", o.out, "key=value report");
  ev->add_option("--out-json", o.out_json, "JSON report");

  auto* sw = app.add_subcommand("sweep", "Per-layer codebook/LM sweep over feature directories");
  sw->add_option("--manifest", o.manifest)->required();
  sw->add_option("--features", o.feature_dirs, "One directory per layer")->required();
  sw->add_option("--out", o.out);

  auto* ms = app.add_subcommand("make-splits", "Assign train/valid/test splits");
  ms->add_option("--manifest", o.manifest)->required();
  ms->add_option("--out", o.out)->required();
  ms->add_option("--test-speakers", o.splits.test_speakers)->capture_default_str();
  ms->add_option("--utts-per-speaker", o.splits.utts_per_test_speaker)->capture_default_str();
  ms->add_option("--valid-size", o.splits.valid_size)->capture_default_str();
  ms->add_option("--min-speaker-utts", o.splits.min_speaker_utts)->capture_default_str();

  auto* flt = app.add_subcommand("filter", "Exclude over-long and pitchless utterances");
  flt->add_option("--manifest", o.manifest)->required();
  flt->add_option("--out", o.out)->required();
  flt->add_option("--max-duration", o.max_duration)->capture_default_str();
  flt->add_flag("--probe", o.probe, "Measure duration and pitch from the audio first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (seed_opt->count() == 0)
      if (const char* env = std::getenv("PPT_SEED")) c.seed = std::stoull(env);
    c.smoothing = o.smoothing == "kn" ? SmoothingSpec::kneser_ney(o.discount)
                                      : SmoothingSpec::add_k(o.add_k);
    c.validate();

    if (*extract) return cmd_extract(o);
    if (*fit) return cmd_fit_kmeans(o);
    if (*tok) return cmd_tokenize(o);
    if (*train) return cmd_train_lm(o);
    if (*ppl) return cmd_ppl(o);
    if (*samp) return cmd_sample(o);
    if (*ev) return cmd_eval(o);
    if (*sw) return cmd_sweep(o);
    if (*ms) return cmd_make_splits(o);
    if (*flt) return cmd_filter(o);
  } catch (const ConfigError& e) {
    log(e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    log(std::string("bad PPT_SEED: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log(e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
