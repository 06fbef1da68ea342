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

// qasnne: command-line driver for the uncertainty pipeline.
//
//   qasnne synth    --out-dir data/synth
//   qasnne label    --dataset data/synth/dataset.jsonl --samples ... --out labels.jsonl
//   qasnne score    --dataset ... --samples ... --align Emb=alignment_emb.jsonl --out results.jsonl
//   qasnne evaluate --labels labels.jsonl --results results.jsonl --out-dir report/
//
// Settings come from (lowest to highest precedence): built-in defaults, the
// --config JSON file, then command-line flags.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qasnne/config.hpp"
#include "qasnne/errors.hpp"
#include "qasnne/pipeline.hpp"

namespace {

using qasnne::RunConfig;

// Flag values are held as optionals so that only flags the user actually
// passed override the config file.
struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset, samples, manifest, labels, results, output_dir;
  std::optional<std::string> endpoint, model, prompt_template;
  std::optional<double> temperature, greedy_temperature, top_p;
  std::optional<int> n_samples, top_k;
  std::optional<int> concurrency, max_attempts, backoff_ms, timeout_ms, workers;
  std::optional<std::string> tokenizer, weight_scale, dse_method, backend;
  std::optional<double> tau, beta, gamma, lambda, theta, label_threshold, dse_threshold;
  std::vector<std::string> estimators;
  std::optional<std::string> scorer_url;
  std::vector<std::string> align;
  bool allow_dse_detection = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> grounded, hallucinated, synth_samples;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : qasnne::load_config(o.config_path);
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.data.dataset, o.dataset);
  set(c.data.samples, o.samples);
  set(c.data.manifest, o.manifest);
  set(c.data.labels, o.labels);
  set(c.data.results, o.results);
  set(c.output_dir, o.output_dir);

  set(c.generation.endpoint_url, o.endpoint);
  set(c.generation.model_name, o.model);
  set(c.generation.prompt_template, o.prompt_template);
  set(c.generation.sample_temperature, o.temperature);
  set(c.generation.greedy_temperature, o.greedy_temperature);
  set(c.generation.top_p, o.top_p);
  set(c.generation.top_k, o.top_k);
  set(c.generation.n_samples, o.n_samples);

  set(c.sampling.concurrency, o.concurrency);
  set(c.sampling.max_attempts, o.max_attempts);
  set(c.sampling.backoff_ms, o.backoff_ms);
  set(c.sampling.timeout_ms, o.timeout_ms);

  if (o.tokenizer) c.tokenizer = qasnne::parse_tokenizer_mode(*o.tokenizer);
  set(c.label_threshold, o.label_threshold);

  set(c.scoring.tau, o.tau);
  set(c.scoring.alignment.beta, o.beta);
  set(c.scoring.alignment.gamma, o.gamma);
  set(c.scoring.alignment.lambda, o.lambda);
  if (o.weight_scale) c.scoring.alignment.weight_scale = qasnne::parse_weight_scale(*o.weight_scale);
  if (o.dse_method) c.scoring.dse_method = qasnne::parse_cluster_method(*o.dse_method);
  set(c.scoring.dse_threshold, o.dse_threshold);
  set(c.scoring.workers, o.workers);
  if (!o.estimators.empty()) {
    c.scoring.estimators.clear();
    for (const auto& name : o.estimators) c.scoring.estimators.push_back(qasnne::parse_estimator(name));
  }

  set(c.detection.theta_star, o.theta);
  if (o.allow_dse_detection) c.detection.allow_dse = true;

  if (o.scorer_url) c.backend.scorer_url = *o.scorer_url;
  if (o.backend) {
    if (*o.backend == "service") {
      c.backend.kind = qasnne::BackendKind::kService;
    } else if (*o.backend == "precomputed") {
      c.backend.kind = qasnne::BackendKind::kPrecomputed;
    } else {
      throw qasnne::ValidationError("unknown backend '" + *o.backend +
                                    "' (expected precomputed|service)");
    }
  }
  if (!o.align.empty()) {
    c.backend.alignment_files.clear();
    for (const auto& spec : o.align) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) {
        throw qasnne::ValidationError("--align expects VARIANT=PATH, got '" + spec + "'");
      }
      const auto v = qasnne::parse_variant(spec.substr(0, eq));
      if (!c.backend.alignment_files.emplace(v, spec.substr(eq + 1)).second) {
        throw qasnne::ValidationError("--align given twice for " + spec.substr(0, eq));
      }
    }
  }

  set(c.synth.seed, o.seed);
  set(c.synth.grounded, o.grounded);
  set(c.synth.hallucinated, o.hallucinated);
  set(c.synth.n_samples, o.synth_samples);

  c.validate();
  return c;
}

void report(const qasnne::StageResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& a : r.artifacts) std::cerr << "wrote " << a.string() << "\n";
  std::cout << r.summary.dump() << "\n";
}

std::string need(const std::string& value, const char* flag) {
  if (value.empty()) throw qasnne::ValidationError(std::string("missing required ") + flag);
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-aligned semantic-entropy uncertainty toolkit"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--tokenizer", o.tokenizer, "default|cased");
  };
  auto add_records = [&](CLI::App* sub) {
    sub->add_option("--dataset", o.dataset, "dataset JSONL");
    sub->add_option("--samples", o.samples, "sample-set JSONL (omit if inlined in dataset)");
    sub->add_option("-j,--workers", o.workers, "parallel workers across records");
  };

  std::string out;
  std::string variant_name;
  std::string estimator_name;
  std::string report_in, report_out;
  double alert_margin = 0.05;

  auto* synth = app.add_subcommand("synth", "write a deterministic synthetic dataset");
  add_common(synth);
  synth->add_option("--out-dir", o.output_dir, "output directory");
  synth->add_option("--seed", o.seed);
  synth->add_option("--grounded", o.grounded, "grounded record count");
  synth->add_option("--hallucinated", o.hallucinated, "hallucinated record count");
  synth->add_option("--n-samples", o.synth_samples, "samples per record");

  auto* sample = app.add_subcommand("sample", "draw greedy + stochastic answers from a chat endpoint");
  add_common(sample);
  sample->add_option("--dataset", o.dataset, "dataset JSONL");
  sample->add_option("--out", out, "sample-set JSONL (appended; reruns resume)");
  sample->add_option("--endpoint", o.endpoint, "chat-completions URL");
  sample->add_option("--model", o.model);
  sample->add_option("--prompt-template", o.prompt_template);
  sample->add_option("--temperature", o.temperature, "sampling temperature");
  sample->add_option("--greedy-temperature", o.greedy_temperature);
  sample->add_option("--top-k", o.top_k);
  sample->add_option("--top-p", o.top_p);
  sample->add_option("-n,--n-samples", o.n_samples);
  sample->add_option("-j,--concurrency", o.concurrency);
  sample->add_option("--max-attempts", o.max_attempts);
  sample->add_option("--backoff-ms", o.backoff_ms);
  sample->add_option("--timeout-ms", o.timeout_ms);

  auto* label = app.add_subcommand("label", "label greedy answers against references");
  add_common(label);
  add_records(label);
  label->add_option("--out", out, "label JSONL");
  label->add_option("--label-threshold", o.label_threshold);

  auto* align = app.add_subcommand("align", "fetch question-alignment payloads from the scorer service");
  add_common(align);
  add_records(align);
  align->add_option("--variant", variant_name, "Emb|Ent|CrossE")->required();
  align->add_option("--scorer-url", o.scorer_url);
  align->add_option("--out", out, "alignment JSONL");
  align->add_option("--beta", o.beta);
  align->add_option("--gamma", o.gamma);
  align->add_option("--lambda", o.lambda);

  auto* score = app.add_subcommand("score", "compute uncertainty scores");
  add_common(score);
  add_records(score);
  score->add_option("--out", out, "result JSONL");
  score->add_option("--estimators", o.estimators, "dse snne qa_snne_emb qa_snne_ent qa_snne_crosse")
      ->delimiter(',');
  score->add_option("--tau", o.tau);
  score->add_option("--beta", o.beta);
  score->add_option("--gamma", o.gamma);
  score->add_option("--lambda", o.lambda);
  score->add_option("--weight-scale", o.weight_scale, "softmax|softmax_times_n");
  score->add_option("--dse-method", o.dse_method, "rouge_threshold|entailment_bidirectional");
  score->add_option("--dse-threshold", o.dse_threshold);
  score->add_option("--backend", o.backend, "precomputed|service");
  score->add_option("--scorer-url", o.scorer_url);
  score->add_option("--align", o.align, "VARIANT=PATH precomputed alignment file (repeatable)");

  auto* evaluate = app.add_subcommand("evaluate", "AUROC, accuracy and rejection curves");
  add_common(evaluate);
  evaluate->add_option("--labels", o.labels);
  evaluate->add_option("--results", o.results);
  evaluate->add_option("--manifest", o.manifest, "dataset manifest (names the split)");
  evaluate->add_option("--out-dir", o.output_dir);
  evaluate->add_option("--theta", o.theta, "detection threshold");
  evaluate->add_option("--estimators", o.estimators)->delimiter(',');
  evaluate->add_flag("--allow-dse-detection", o.allow_dse_detection);

  auto* prc = app.add_subcommand("prc", "rejection curve CSV for one estimator");
  add_common(prc);
  prc->add_option("--labels", o.labels);
  prc->add_option("--results", o.results);
  prc->add_option("--estimator", estimator_name)->required();
  prc->add_option("--out", out, "CSV path");

  auto* compare = app.add_subcommand("compare", "metric deltas between paired split reports");
  compare->add_option("--in", report_in, "in-template report.json")->required();
  compare->add_option("--out", report_out, "out-of-template report.json")->required();
  compare->add_option("--alert-margin", alert_margin);
  compare->add_option("--out-dir", o.output_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const RunConfig c = resolve(o);
    const std::filesystem::path out_dir = c.output_dir;
    auto out_or = [&](const char* fallback) {
      return out.empty() ? out_dir / fallback : std::filesystem::path(out);
    };
    auto ensure_parent = [](const std::filesystem::path& p) {
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      return p;
    };

    if (*synth) {
      report(qasnne::run_synth(c, out_dir));
    } else if (*sample) {
      report(qasnne::run_sample(c, need(c.data.dataset, "--dataset"),
                                ensure_parent(out_or("samples.jsonl"))));
    } else if (*label) {
      report(qasnne::run_label(c, need(c.data.dataset, "--dataset"), c.data.samples,
                               ensure_parent(out_or("labels.jsonl"))));
    } else if (*align) {
      const auto v = qasnne::parse_variant(variant_name);
      std::string fallback = "alignment_" + std::string(qasnne::to_string(v)) + ".jsonl";
      report(qasnne::run_align(c, need(c.data.dataset, "--dataset"), c.data.samples, v,
                               ensure_parent(out_or(fallback.c_str()))));
    } else if (*score) {
      report(qasnne::run_score(c, need(c.data.dataset, "--dataset"), c.data.samples,
                               ensure_parent(out_or("results.jsonl"))));
    } else if (*evaluate) {
      report(qasnne::run_evaluate(c, c.data.labels, c.data.results, c.data.manifest, out_dir));
    } else if (*prc) {
      const auto e = qasnne::parse_estimator(estimator_name);
      std::string fallback = "prc_" + std::string(qasnne::to_string(e)) + ".csv";
      report(qasnne::run_prc(c, c.data.labels, c.data.results, e,
                             ensure_parent(out_or(fallback.c_str()))));
    } else if (*compare) {
      report(qasnne::run_compare(report_in, report_out, alert_margin, out_dir));
    }
  } catch (const qasnne::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 2;
  } catch (const qasnne::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
