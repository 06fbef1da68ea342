// Copyright 2026 The QA-SNNE Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qasnne/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <set>
#include <thread>

#include "qasnne/entropy.hpp"
#include "qasnne/sampler.hpp"
#include "qasnne/scorer_client.hpp"
#include "qasnne/synth.hpp"
#include "qasnne/textsim.hpp"

namespace qasnne {
namespace {

void require_file(const std::filesystem::path& path, const std::string& what,
                  const std::string& stage) {
  if (path.empty() || !std::filesystem::exists(path)) {
    throw ValidationError("missing " + what + " file '" + path.string() + "': run `qasnne " +
                          stage + "` first");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the caller restores
// order through the index.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = cursor++; i < n; i = cursor++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            cursor = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string id_digest(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (const auto& id : ids) joined += id + '\n';
  return fnv1a64_hex(joined);
}

}  // namespace

void write_meta(const std::filesystem::path& artifact, const RunConfig& config) {
  const Json meta{{"artifact", artifact.filename().string()},
                  {"config_hash", config_hash(config)},
                  {"config", to_json(config)}};
  write_text(artifact.string() + ".meta.json", meta.dump(2) + "\n");
}

std::vector<QARecord> load_sampled_records(const std::filesystem::path& dataset_path,
                                           const std::filesystem::path& samples_path,
                                           std::vector<std::string>& warnings) {
  require_file(dataset_path, "dataset", "synth");
  if (samples_path.empty()) {
    return read_all(load_dataset(dataset_path, Schema::kSampled));
  }
  require_file(samples_path, "samples", "sample");
  const auto records = read_all(load_dataset(dataset_path));
  const auto samples = read_all(load_samples(samples_path));
  auto joined = join_by_id<QARecord, SampleSet>(records, samples, "samples");
  for (const auto& id : joined.unmatched_left) {
    warnings.push_back("record '" + id + "' has no samples");
  }
  for (const auto& id : joined.unmatched_right) {
    warnings.push_back("samples for unknown record '" + id + "'");
  }
  std::vector<QARecord> out;
  out.reserve(joined.rows.size());
  for (auto& row : joined.rows) out.push_back(attach_samples(std::move(row.left), row.right));
  return out;
}

std::vector<Estimator> resolve_estimators(const RunConfig& config,
                                          const AlignmentSource* source) {
  if (!config.scoring.estimators.empty()) {
    for (Estimator e : config.scoring.estimators) {
      if (is_qa_estimator(e) && (source == nullptr || !source->provides(variant_of(e)))) {
        throw ValidationError("missing upstream artifact for " + std::string(to_string(e)) +
                              ": run `qasnne align --variant " +
                              std::string(to_string(variant_of(e))) +
                              "` and pass its alignment file");
      }
    }
    return config.scoring.estimators;
  }
  std::vector<Estimator> out = {Estimator::kDse, Estimator::kSnne};
  if (source != nullptr) {
    for (Variant v : kAllVariants) {
      if (source->provides(v)) out.push_back(estimator_for(v));
    }
  }
  return out;
}

UncertaintyResult score_record(const QARecord& record, const RunConfig& config,
                               std::span<const Estimator> estimators,
                               AlignmentSource* source, NliScorer* nli,
                               const std::string& hash) {
  if (!record.samples) {
    throw ValidationError("record '" + record.id + "' has no samples to score");
  }
  const auto& samples = *record.samples;
  UncertaintyResult result;
  result.id = record.id;
  result.tau = config.scoring.tau;
  result.n = static_cast<int>(samples.size());
  result.config_hash = hash;

  const Eigen::MatrixXd s_text = base_similarity_matrix(samples, config.tokenizer);
  for (Estimator e : estimators) {
    switch (e) {
      case Estimator::kDse: {
        const auto clustering = cluster_semantic(samples, config.scoring.dse_method,
                                                 config.scoring.dse_threshold,
                                                 config.tokenizer, nli);
        result.scores[e] = dse(clustering);
        break;
      }
      case Estimator::kSnne:
        result.scores[e] = snne(s_text, config.scoring.tau);
        break;
      default: {
        const Variant v = variant_of(e);
        const Eigen::VectorXd alpha = source->alphas(record, v, config.scoring.alignment);
        const auto align = make_alignment_scores(v, alpha, config.scoring.alignment);
        result.scores[e] = qa_snne(s_text, align, config.scoring.tau,
                                   config.scoring.alignment.weight_scale);
        break;
      }
    }
  }
  return result;
}

StageResult run_sample(const RunConfig& config, const std::filesystem::path& dataset,
                       const std::filesystem::path& out) {
  require_file(dataset, "dataset", "synth");
  SamplingJob job;
  job.dataset_path = dataset;
  job.generation = config.generation;
  job.concurrency = config.sampling.concurrency;
  job.retry.max_attempts = config.sampling.max_attempts;
  job.retry.backoff_base = std::chrono::milliseconds(config.sampling.backoff_ms);
  job.timeout = std::chrono::milliseconds(config.sampling.timeout_ms);
  job.output_path = out;
  if (const char* key = std::getenv("QASNNE_API_KEY")) job.api_key = key;
  const SamplingSummary summary = run_sampling(job);
  StageResult r;
  r.artifacts.push_back(out);
  r.summary = summary.to_json();
  for (const auto& rec : summary.records) {
    if (!rec.ok) r.warnings.push_back("record '" + rec.id + "' failed: " + rec.error);
  }
  write_meta(out, config);
  return r;
}

StageResult run_label(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, const std::filesystem::path& out) {
  StageResult r;
  const auto records = load_sampled_records(dataset, samples, r.warnings);
  const auto labels = label_hallucinations(records, config.label_threshold, config.tokenizer);
  write_jsonl<HallucinationLabel>(out, labels);
  write_meta(out, config);
  std::size_t positives = 0;
  for (const auto& l : labels) positives += l.is_hallucination;
  r.artifacts.push_back(out);
  r.summary = Json{{"records", labels.size()}, {"hallucinations", positives}};
  return r;
}

StageResult run_align(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, Variant variant,
                      const std::filesystem::path& out) {
  if (config.backend.scorer_url.empty()) {
    throw ValidationError("align needs a scorer-service URL (backend.scorer_url)");
  }
  StageResult r;
  const auto records = load_sampled_records(dataset, samples, r.warnings);
  ScorerClient client(config.backend.scorer_url);
  ServiceAlignments service(client);
  std::vector<AlignmentRecord> rows(records.size());
  parallel_for(records.size(), config.scoring.workers, [&](std::size_t i) {
    AlignmentRecord rec = service.fetch(records[i], variant);
    const Eigen::VectorXd alpha = alphas_from_payload(rec, config.scoring.alignment);
    rec.alpha = std::vector<double>(alpha.data(), alpha.data() + alpha.size());
    rows[i] = std::move(rec);
  });
  write_jsonl<AlignmentRecord>(out, rows);
  write_meta(out, config);
  r.artifacts.push_back(out);
  r.summary = Json{{"records", rows.size()}, {"variant", to_string(variant)}};
  return r;
}

StageResult run_score(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, const std::filesystem::path& out) {
  StageResult r;
  const auto records = load_sampled_records(dataset, samples, r.warnings);

  std::unique_ptr<ScorerClient> client;
  if (!config.backend.scorer_url.empty()) {
    client = std::make_unique<ScorerClient>(config.backend.scorer_url);
  }
  std::unique_ptr<AlignmentSource> source;
  if (config.backend.kind == BackendKind::kService) {
    source = std::make_unique<ServiceAlignments>(*client);
  } else if (!config.backend.alignment_files.empty()) {
    auto pre = std::make_unique<PrecomputedAlignments>();
    for (const auto& [v, path] : config.backend.alignment_files) {
      require_file(path, std::string(to_string(v)) + " alignment", "align");
      pre->add_file(path);
    }
    source = std::move(pre);
  }
  if (config.scoring.dse_method == ClusterMethod::kEntailmentBidirectional && !client) {
    throw BackendError("DSE entailment clustering needs backend.scorer_url");
  }
  const auto estimators = resolve_estimators(config, source.get());
  const std::string hash = config_hash(config);

  std::vector<UncertaintyResult> results(records.size());
  parallel_for(records.size(), config.scoring.workers, [&](std::size_t i) {
    results[i] = score_record(records[i], config, estimators, source.get(), client.get(), hash);
  });
  write_jsonl<UncertaintyResult>(out, results);
  write_meta(out, config);
  Json names = Json::array();
  for (Estimator e : estimators) names.push_back(to_string(e));
  r.artifacts.push_back(out);
  r.summary = Json{{"records", results.size()}, {"estimators", std::move(names)},
                   {"alignment_source", source ? source->describe() : "none"}};
  return r;
}

StageResult run_evaluate(const RunConfig& config, const std::filesystem::path& labels_path,
                         const std::filesystem::path& results_path,
                         const std::filesystem::path& manifest_path,
                         const std::filesystem::path& out_dir) {
  require_file(labels_path, "labels", "label");
  require_file(results_path, "results", "score");
  const auto labels = read_all(load_labels(labels_path));
  const auto results = read_all(load_results(results_path));

  DatasetInfo info;
  std::optional<GenerationConfig> generation;
  if (!manifest_path.empty()) {
    const DatasetManifest m = load_manifest(manifest_path);
    info.name = m.name;
    info.split = m.split;
    info.paired_with = m.paired_with;
    generation = m.generation_config;
  } else {
    info.name = labels_path.stem().string();
  }
  std::vector<std::string> ids;
  for (const auto& l : labels) ids.push_back(l.id);
  info.id_digest = id_digest(std::move(ids));

  EvalOptions options;
  options.theta_star = config.detection.theta_star;
  options.allow_dse_detection = config.detection.allow_dse;
  options.estimators = config.scoring.estimators;
  EvalReport report = build_report(labels, results, options, info);

  std::set<std::string> result_hashes;
  for (const auto& res : results) result_hashes.insert(res.config_hash);
  report.config_hash = config_hash(config);
  report.provenance = Json{{"config", to_json(config)},
                           {"results_config_hashes", result_hashes},
                           {"dataset_generation_config",
                            generation ? to_json(*generation) : Json(nullptr)}};

  std::filesystem::create_directories(out_dir);
  StageResult r;
  for (const auto& id : report.unmatched_labels) {
    r.warnings.push_back("label without result: '" + id + "'");
  }
  for (const auto& id : report.unmatched_results) {
    r.warnings.push_back("result without label: '" + id + "'");
  }
  const auto json_path = out_dir / "report.json";
  const auto text_path = out_dir / "report.txt";
  write_text(json_path, to_json(report).dump(2) + "\n");
  write_text(text_path, to_text(report));
  r.artifacts = {json_path, text_path};
  for (const auto& [e, m] : report.estimators) {
    const auto csv = out_dir / ("prc_" + std::string(to_string(e)) + ".csv");
    write_text(csv, prc_csv(m.prc));
    r.artifacts.push_back(csv);
  }
  r.summary = to_json(report);
  return r;
}

StageResult run_prc(const RunConfig& config, const std::filesystem::path& labels_path,
                    const std::filesystem::path& results_path, Estimator estimator,
                    const std::filesystem::path& out_csv) {
  require_file(labels_path, "labels", "label");
  require_file(results_path, "results", "score");
  const auto labels = read_all(load_labels(labels_path));
  const auto results = read_all(load_results(results_path));
  auto joined = join_by_id<HallucinationLabel, UncertaintyResult>(labels, results, "results");
  std::vector<double> scores;
  std::vector<double> utility;
  for (const auto& row : joined.rows) {
    const auto s = row.right.score(estimator);
    if (!s) {
      throw ValidationError("estimator " + std::string(to_string(estimator)) +
                            " absent for record '" + row.right.id + "'");
    }
    scores.push_back(*s);
    utility.push_back(row.left.rouge_f);
  }
  const auto fractions = default_rejection_fractions();
  const auto curve = prc(scores, utility, fractions);
  if (out_csv.has_parent_path()) std::filesystem::create_directories(out_csv.parent_path());
  write_text(out_csv, prc_csv(curve));
  write_meta(out_csv, config);
  StageResult r;
  r.artifacts.push_back(out_csv);
  for (const auto& id : joined.unmatched_left) r.warnings.push_back("label without result: '" + id + "'");
  for (const auto& id : joined.unmatched_right) r.warnings.push_back("result without label: '" + id + "'");
  return r;
}

StageResult run_compare(const std::filesystem::path& report_in,
                        const std::filesystem::path& report_out, double alert_margin,
                        const std::filesystem::path& out_dir) {
  auto read_report = [](const std::filesystem::path& p) {
    require_file(p, "report", "evaluate");
    std::ifstream in(p);
    try {
      return report_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw ValidationError(p.string() + ": " + e.what());
    }
  };
  const DeltaReport d = compare_splits(read_report(report_in), read_report(report_out),
                                       alert_margin);
  std::filesystem::create_directories(out_dir);
  const auto json_path = out_dir / "compare.json";
  const auto text_path = out_dir / "compare.txt";
  write_text(json_path, to_json(d).dump(2) + "\n");
  write_text(text_path, to_text(d));
  StageResult r;
  r.artifacts = {json_path, text_path};
  r.summary = to_json(d);
  for (const auto& m : d.deltas) {
    if (m.alert) r.warnings.push_back(m.metric + " degraded by " + std::to_string(-m.delta));
  }
  return r;
}

StageResult run_synth(const RunConfig& config, const std::filesystem::path& out_dir) {
  SynthSpec spec;
  spec.seed = config.synth.seed;
  spec.grounded = config.synth.grounded;
  spec.hallucinated = config.synth.hallucinated;
  spec.n_samples = config.synth.n_samples;
  const SynthData data = generate_synthetic(spec);
  const SynthPaths p = write_synthetic(data, out_dir);
  StageResult r;
  r.artifacts = {p.dataset, p.samples, p.manifest, p.emb, p.ent, p.crosse};
  for (const auto& a : r.artifacts) {
    if (a.extension() == ".jsonl") write_meta(a, config);
  }
  r.summary = Json{{"records", data.records.size()},
                   {"grounded", spec.grounded},
                   {"hallucinated", spec.hallucinated},
                   {"seed", spec.seed}};
  return r;
}

}  // namespace qasnne
