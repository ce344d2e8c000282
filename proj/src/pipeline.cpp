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

#include "pptok/pipeline.hpp"

#include "pptok/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

namespace pptok {

void PipelineConfig::validate() {
  if (sample_rate <= 0 || hop <= 0) throw ConfigError("sample_rate and hop must be positive");
  if (k < 1 || kmeans_batch < 1 || kmeans_max_iters < 1)
    throw ConfigError("k, kmeans batch and iterations must be positive");
  if (!(kmeans_tol >= 0.0)) throw ConfigError("kmeans tolerance must be non-negative");
  if (lm_order < 1) throw ConfigError("lm order must be positive");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (gen_count < 0 || max_len < 1) throw ConfigError("bad generation count or length");
  if (jobs < 1) throw ConfigError("jobs must be positive");
  mel.hop = hop;
  pitch.hop = hop;
  mel.validate(sample_rate);
  if (n_coef < 2 || n_coef > mel.n_mels)
    throw ConfigError("n_coef must lie in [2, n_mels]");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest_dir,
                                         const std::string& audio_path) {
  const std::filesystem::path p(audio_path);
  return p.is_absolute() ? p : manifest_dir / p;
}

Waveform load_audio(const std::filesystem::path& path, const PipelineConfig& cfg) {
  Waveform w = load_wav(path);
  if (w.sample_rate != cfg.sample_rate) w = resample(w, cfg.sample_rate);
  return w;
}

FeatureMatrix compute_features(const Waveform& w, FeatureKind kind,
                               const PipelineConfig& cfg) {
  MelConfig mel = cfg.mel;
  mel.hop = cfg.hop;
  FeatureMatrix spec = mel_spectrogram(w, mel);
  switch (kind) {
    case FeatureKind::mel_spectrogram: return spec;
    case FeatureKind::mel_cepstra: return mel_cepstra(spec, cfg.n_coef);
    case FeatureKind::external: break;
  }
  throw ConfigError("external features cannot be computed from audio");
}

AudioAnalysis analyze_audio(const Waveform& w, const PipelineConfig& cfg) {
  PitchConfig pitch = cfg.pitch;
  pitch.hop = cfg.hop;
  return {compute_features(w, FeatureKind::mel_cepstra, cfg), extract_f0(w, pitch)};
}

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / (id + ".pptf");
}

std::vector<StageFailure> extract_features(
    const std::vector<const UtteranceRecord*>& records,
    const std::filesystem::path& manifest_dir, const std::filesystem::path& out_dir,
    FeatureKind kind, const PipelineConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::optional<std::string>> errors(records.size());
  parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
    try {
      const Waveform w =
          load_audio(resolve_audio_path(manifest_dir, records[i]->audio_path), cfg);
      write_features(feature_path(out_dir, records[i]->id), compute_features(w, kind, cfg));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<StageFailure> failures;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (errors[i]) failures.push_back({records[i]->id, *errors[i]});
  return failures;
}

Manifest probe_audio(const Manifest& m, const std::filesystem::path& manifest_dir,
                     const PipelineConfig& cfg, std::vector<StageFailure>* failures) {
  Manifest out = m;
  std::vector<std::optional<std::string>> errors(out.records.size());
  parallel_for(out.records.size(), cfg.jobs, [&](std::size_t i) {
    auto& r = out.records[i];
    try {
      const Waveform w = load_audio(resolve_audio_path(manifest_dir, r.audio_path), cfg);
      PitchConfig pitch = cfg.pitch;
      pitch.hop = cfg.hop;
      r.duration_sec = w.duration_sec();
      r.has_pitch = w.size() > 0 && extract_f0(w, pitch).any_voiced();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  if (failures)
    for (std::size_t i = 0; i < out.records.size(); ++i)
      if (errors[i]) failures->push_back({out.records[i].id, *errors[i]});
  return out;
}

std::vector<UtteranceFeatures> load_feature_dir(const std::filesystem::path& dir,
                                                const std::vector<std::string>& ids) {
  if (!std::filesystem::is_directory(dir) || std::filesystem::is_empty(dir))
    throw MissingFeatures(dir.string() + " is missing or empty");
  std::vector<UtteranceFeatures> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto path = feature_path(dir, id);
    if (!std::filesystem::exists(path))
      throw MissingFeatures("no features for '" + id + "' in " + dir.string());
    out.push_back({id, read_features(path)});
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<const UtteranceRecord*>& records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto* r : records) ids.push_back(r->id);
  return ids;
}

Codebook fit_codebook(const std::vector<UtteranceFeatures>& utterances,
                      const PipelineConfig& cfg, KMeansTrace* trace) {
  PointSet points;
  for (const auto& u : utterances) points.add(u.features.data);
  KMeansOptions opts;
  opts.k = cfg.k;
  opts.batch_size = cfg.kmeans_batch;
  opts.max_iters = cfg.kmeans_max_iters;
  opts.tol = cfg.kmeans_tol;
  opts.seed = cfg.seed;
  opts.feature_kind = utterances.empty() ? FeatureKind::external
                                         : utterances.front().features.kind;
  return fit_minibatch_kmeans(points, opts, trace);
}

std::vector<TokenRecord> tokenize_all(const Codebook& cb,
                                      const std::vector<UtteranceFeatures>& utterances,
                                      int jobs) {
  for (const auto& u : utterances)
    if (u.features.dim() != cb.dim())
      throw DimensionMismatch("features of '" + u.id + "' have " +
                              std::to_string(u.features.dim()) + " dims, codebook " +
                              std::to_string(cb.dim()));
  std::vector<TokenRecord> out(utterances.size());
  parallel_for(utterances.size(), jobs, [&](std::size_t i) {
    out[i] = {utterances[i].id, tokenize_utterance(cb, utterances[i].features)};
  });
  return out;
}

NGramModel train_token_lm(const std::vector<TokenRecord>& records, int num_tokens,
                          const PipelineConfig& cfg) {
  const auto corpus = token_sequences(records);
  return NGramModel::train(corpus, num_tokens, cfg.lm_order, cfg.smoothing, cfg.seed);
}

std::vector<TokenRecord> generate_token_records(const NGramModel& lm,
                                                const PipelineConfig& cfg) {
  const auto seqs = generate_batch(lm, cfg.gen_count, cfg.temperature, cfg.max_len, cfg.seed);
  std::vector<TokenRecord> out;
  out.reserve(seqs.size());
  char name[32];
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    std::snprintf(name, sizeof name, "gen_%03zu", i);
    TokenRecord rec{name, {}};
    rec.seq.tokens = seqs[i];
    rec.seq.durations.assign(seqs[i].size(), 1);
    rec.seq.total_frames = static_cast<int>(seqs[i].size());
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("nan");
}

}  // namespace

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  os << "mcd_db=" << format_optional(mcd_db) << '\n'
     << "f0_rmse_hz=" << format_optional(f0_rmse_hz) << '\n'
     << "ppl=" << format_optional(ppl) << '\n'
     << "self_bleu=" << format_optional(self_bleu) << '\n'
     << "self_bleu_gt=" << format_optional(self_bleu_gt) << '\n'
     << "normalized_self_bleu=" << format_optional(normalized_self_bleu) << '\n'
     << "normalized_exceeds_one=" << (normalized_exceeds_one ? 1 : 0) << '\n'
     << "mcd_pairs=" << mcd_pairs << '\n'
     << "f0_pairs=" << f0_pairs << '\n'
     << "skipped_no_voiced_overlap=" << skipped_no_voiced_overlap << '\n';
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  put("mcd_db", mcd_db);
  put("f0_rmse_hz", f0_rmse_hz);
  put("ppl", ppl);
  put("self_bleu", self_bleu);
  put("self_bleu_gt", self_bleu_gt);
  put("normalized_self_bleu", normalized_self_bleu);
  j["normalized_exceeds_one"] = normalized_exceeds_one;
  j["mcd_pairs"] = mcd_pairs;
  j["f0_pairs"] = f0_pairs;
  j["skipped_no_voiced_overlap"] = skipped_no_voiced_overlap;
  j["metadata"] = {{"mcd_excludes_c0", true},
                   {"f0_tracker", "yin"},
                   {"f0_units", "Hz"},
                   {"bleu_max_n", 4},
                   {"bleu_smoothing", "epsilon-numerator 1e-9"}};
  return j.dump(2) + "\n";
}

void require_same_ids(const std::vector<std::string>& expected,
                      const std::vector<std::string>& got, const std::string& what) {
  const std::set<std::string> have(got.begin(), got.end());
  for (const auto& id : expected)
    if (!have.count(id)) throw IdMismatch(what + " lacks id '" + id + "'");
  const std::set<std::string> want(expected.begin(), expected.end());
  for (const auto& id : got)
    if (!want.count(id)) throw IdMismatch(what + " has unexpected id '" + id + "'");
}

void evaluate_audio_pairs(const std::vector<AudioAnalysis>& gt,
                          const std::vector<AudioAnalysis>& generated,
                          MetricsReport& report) {
  if (gt.size() != generated.size())
    throw IdMismatch("paired evaluation needs equally many utterances");
  double mcd_sum = 0.0, f0_sum = 0.0;
  int mcd_n = 0, f0_n = 0, skipped = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    mcd_sum += mcd(gt[i].cepstra, generated[i].cepstra);
    ++mcd_n;
    try {
      f0_sum += f0_rmse(gt[i].pitch, gt[i].cepstra, generated[i].pitch, generated[i].cepstra);
      ++f0_n;
    } catch (const NoVoicedOverlap&) {
      ++skipped;
    }
  }
  report.mcd_pairs = mcd_n;
  report.f0_pairs = f0_n;
  report.skipped_no_voiced_overlap = skipped;
  report.mcd_db = mcd_n ? std::optional(mcd_sum / mcd_n) : std::nullopt;
  report.f0_rmse_hz = f0_n ? std::optional(f0_sum / f0_n) : std::nullopt;
}

void evaluate_audio_pairs(const std::vector<const UtteranceRecord*>& gt,
                          const std::filesystem::path& gt_dir,
                          const std::vector<const UtteranceRecord*>& generated,
                          const std::filesystem::path& gen_dir, const PipelineConfig& cfg,
                          MetricsReport& report) {
  require_same_ids(ids_of(gt), ids_of(generated), "generated manifest");
  std::map<std::string, const UtteranceRecord*> by_id;
  for (const auto* r : generated) by_id[r->id] = r;

  std::vector<AudioAnalysis> a(gt.size()), b(gt.size());
  std::vector<std::optional<std::string>> errors(gt.size());
  parallel_for(gt.size(), cfg.jobs, [&](std::size_t i) {
    try {
      a[i] = analyze_audio(load_audio(resolve_audio_path(gt_dir, gt[i]->audio_path), cfg), cfg);
      b[i] = analyze_audio(
          load_audio(resolve_audio_path(gen_dir, by_id.at(gt[i]->id)->audio_path), cfg), cfg);
    } catch (const std::exception& e) {
      errors[i] = gt[i]->id + ": " + e.what();
    }
  });
  for (const auto& e : errors)
    if (e) throw MalformedWav(*e);
  evaluate_audio_pairs(a, b, report);
}

void evaluate_token_diversity(const std::vector<std::vector<int>>& generated,
                              const std::vector<std::vector<int>>& ground_truth,
                              MetricsReport& report) {
  const BleuReport bleu = normalized_self_bleu(generated, ground_truth);
  report.self_bleu = bleu.self_bleu;
  report.self_bleu_gt = bleu.self_bleu_gt;
  report.normalized_self_bleu = bleu.normalized;
  report.normalized_exceeds_one = bleu.exceeds_one;
}

SweepRow sweep_layer(int layer, const std::filesystem::path& dir, const Manifest& m,
                     const PipelineConfig& cfg) {
  const auto train = load_feature_dir(dir, ids_of(m.in_split(Split::train)));
  const auto test = load_feature_dir(dir, ids_of(m.in_split(Split::test)));
  const Codebook cb = fit_codebook(train, cfg);
  const auto train_tokens = tokenize_all(cb, train, cfg.jobs);
  const auto test_tokens = tokenize_all(cb, test, cfg.jobs);
  const NGramModel lm = train_token_lm(train_tokens, int(cb.k()), cfg);

  const auto test_seqs = token_sequences(test_tokens);
  const auto generated = generate_batch(lm, cfg.gen_count, cfg.temperature, cfg.max_len, cfg.seed);
  const BleuReport bleu = normalized_self_bleu(generated, test_seqs);

  SweepRow row;
  row.layer = layer;
  row.source = dir.string();
  row.ppl = perplexity(lm, test_seqs);
  row.self_bleu = bleu.self_bleu;
  row.self_bleu_gt = bleu.self_bleu_gt;
  row.normalized_self_bleu = bleu.normalized;
  row.kmeans_iterations = cb.trained_iterations;
  return row;
}

std::vector<SweepRow> sweep(const std::vector<std::filesystem::path>& dirs,
                            const Manifest& m, const PipelineConfig& cfg) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    rows.push_back(sweep_layer(int(i) + 1, dirs[i], m, cfg));
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "layer\tsource\tppl\tself_bleu\tself_bleu_gt\tnormalized_self_bleu\tkmeans_iterations\n";
  for (const auto& r : rows)
    os << r.layer << '\t' << r.source << '\t' << format_double(r.ppl) << '\t'
       << format_double(r.self_bleu) << '\t' << format_double(r.self_bleu_gt) << '\t'
       << format_double(r.normalized_self_bleu) << '\t' << r.kmeans_iterations << '\n';
  return os.str();
}

}  // namespace pptok
