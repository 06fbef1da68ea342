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

#include "qasnne/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace qasnne {
namespace {

void reject_unknown(const Json& section, std::string_view name,
                    std::initializer_list<std::string_view> keys) {
  if (!section.is_object()) {
    throw ValidationError("config section '" + std::string(name) + "' must be an object");
  }
  for (const auto& [key, _] : section.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) {
      throw ValidationError("unknown config key '" + std::string(name) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const Json& section, const char* key, T& field) {
  if (auto it = section.find(key); it != section.end() && !it->is_null()) {
    field = it->get<T>();
  }
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  generation.validate();
  if (!(scoring.tau > 0)) throw ValidationError("scoring.tau must be > 0");
  if (!(scoring.alignment.beta >= 0)) throw ValidationError("scoring.beta must be >= 0");
  if (scoring.workers < 1) throw ValidationError("scoring.workers must be >= 1");
  if (sampling.concurrency < 1) throw ValidationError("sampling.concurrency must be >= 1");
  if (sampling.max_attempts < 1) throw ValidationError("sampling.max_attempts must be >= 1");
  if (backend.kind == BackendKind::kService && backend.scorer_url.empty()) {
    throw ValidationError("backend.kind is 'service' but backend.scorer_url is empty");
  }
  if (backend.kind == BackendKind::kService && !backend.alignment_files.empty()) {
    throw ValidationError(
        "conflicting backend settings: 'service' alignment with precomputed alignment files");
  }
  if (synth.grounded < 0 || synth.hallucinated < 0 || synth.n_samples < 2) {
    throw ValidationError("synth counts must be >= 0 and n_samples >= 2");
  }
}

Json to_json(const RunConfig& c) {
  Json estimators = Json::array();
  for (Estimator e : c.scoring.estimators) estimators.push_back(to_string(e));
  Json alignment = Json::object();
  for (const auto& [v, path] : c.backend.alignment_files) {
    alignment[std::string(to_string(v))] = path;
  }
  return Json{
      {"data", {{"dataset", c.data.dataset},
                {"samples", c.data.samples},
                {"manifest", c.data.manifest},
                {"labels", c.data.labels},
                {"results", c.data.results}}},
      {"generation", to_json(c.generation)},
      {"sampling", {{"concurrency", c.sampling.concurrency},
                    {"max_attempts", c.sampling.max_attempts},
                    {"backoff_ms", c.sampling.backoff_ms},
                    {"timeout_ms", c.sampling.timeout_ms}}},
      {"text", {{"tokenizer", to_string(c.tokenizer)}}},
      {"labeling", {{"label_threshold", c.label_threshold}}},
      {"scoring", {{"tau", c.scoring.tau},
                   {"beta", c.scoring.alignment.beta},
                   {"gamma", c.scoring.alignment.gamma},
                   {"lambda", c.scoring.alignment.lambda},
                   {"weight_scale", to_string(c.scoring.alignment.weight_scale)},
                   {"estimators", std::move(estimators)},
                   {"dse_method", to_string(c.scoring.dse_method)},
                   {"dse_threshold", c.scoring.dse_threshold},
                   {"workers", c.scoring.workers}}},
      {"detection", {{"theta_star", c.detection.theta_star},
                     {"allow_dse", c.detection.allow_dse}}},
      {"backend", {{"kind", c.backend.kind == BackendKind::kService ? "service" : "precomputed"},
                   {"scorer_url", c.backend.scorer_url},
                   {"alignment", std::move(alignment)}}},
      {"synth", {{"seed", c.synth.seed},
                 {"grounded", c.synth.grounded},
                 {"hallucinated", c.synth.hallucinated},
                 {"n_samples", c.synth.n_samples}}},
      {"output_dir", c.output_dir}};
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j, "<root>", {"data", "generation", "sampling", "text", "labeling",
                               "scoring", "detection", "backend", "synth", "output_dir"});
  RunConfig c;
  try {
    if (auto it = j.find("data"); it != j.end()) {
      reject_unknown(*it, "data", {"dataset", "samples", "manifest", "labels", "results"});
      read(*it, "dataset", c.data.dataset);
      read(*it, "samples", c.data.samples);
      read(*it, "manifest", c.data.manifest);
      read(*it, "labels", c.data.labels);
      read(*it, "results", c.data.results);
    }
    if (auto it = j.find("generation"); it != j.end()) {
      reject_unknown(*it, "generation",
                     {"greedy_temperature", "sample_temperature", "n_samples", "top_k",
                      "top_p", "prompt_template", "model_name", "endpoint_url"});
      c.generation = generation_config_from_json(*it);
    }
    if (auto it = j.find("sampling"); it != j.end()) {
      reject_unknown(*it, "sampling", {"concurrency", "max_attempts", "backoff_ms", "timeout_ms"});
      read(*it, "concurrency", c.sampling.concurrency);
      read(*it, "max_attempts", c.sampling.max_attempts);
      read(*it, "backoff_ms", c.sampling.backoff_ms);
      read(*it, "timeout_ms", c.sampling.timeout_ms);
    }
    if (auto it = j.find("text"); it != j.end()) {
      reject_unknown(*it, "text", {"tokenizer"});
      if (it->contains("tokenizer")) {
        c.tokenizer = parse_tokenizer_mode((*it)["tokenizer"].get<std::string>());
      }
    }
    if (auto it = j.find("labeling"); it != j.end()) {
      reject_unknown(*it, "labeling", {"label_threshold"});
      read(*it, "label_threshold", c.label_threshold);
    }
    if (auto it = j.find("scoring"); it != j.end()) {
      reject_unknown(*it, "scoring", {"tau", "beta", "gamma", "lambda", "weight_scale",
                                      "estimators", "dse_method", "dse_threshold", "workers"});
      read(*it, "tau", c.scoring.tau);
      read(*it, "beta", c.scoring.alignment.beta);
      read(*it, "gamma", c.scoring.alignment.gamma);
      read(*it, "lambda", c.scoring.alignment.lambda);
      if (it->contains("weight_scale")) {
        c.scoring.alignment.weight_scale =
            parse_weight_scale((*it)["weight_scale"].get<std::string>());
      }
      if (it->contains("estimators")) {
        for (const auto& e : (*it)["estimators"]) {
          c.scoring.estimators.push_back(parse_estimator(e.get<std::string>()));
        }
      }
      if (it->contains("dse_method")) {
        c.scoring.dse_method = parse_cluster_method((*it)["dse_method"].get<std::string>());
      }
      read(*it, "dse_threshold", c.scoring.dse_threshold);
      read(*it, "workers", c.scoring.workers);
    }
    if (auto it = j.find("detection"); it != j.end()) {
      reject_unknown(*it, "detection", {"theta_star", "allow_dse"});
      read(*it, "theta_star", c.detection.theta_star);
      read(*it, "allow_dse", c.detection.allow_dse);
    }
    if (auto it = j.find("backend"); it != j.end()) {
      reject_unknown(*it, "backend", {"kind", "scorer_url", "alignment"});
      if (it->contains("kind")) {
        const auto kind = (*it)["kind"].get<std::string>();
        if (kind == "service") {
          c.backend.kind = BackendKind::kService;
        } else if (kind == "precomputed") {
          c.backend.kind = BackendKind::kPrecomputed;
        } else {
          throw ValidationError("unknown backend.kind '" + kind + "'");
        }
      }
      read(*it, "scorer_url", c.backend.scorer_url);
      if (it->contains("alignment")) {
        for (const auto& [v, path] : (*it)["alignment"].items()) {
          c.backend.alignment_files[parse_variant(v)] = path.get<std::string>();
        }
      }
    }
    if (auto it = j.find("synth"); it != j.end()) {
      reject_unknown(*it, "synth", {"seed", "grounded", "hallucinated", "n_samples"});
      read(*it, "seed", c.synth.seed);
      read(*it, "grounded", c.synth.grounded);
      read(*it, "hallucinated", c.synth.hallucinated);
      read(*it, "n_samples", c.synth.n_samples);
    }
    read(j, "output_dir", c.output_dir);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) { return fnv1a64_hex(to_json(c).dump()); }

}  // namespace qasnne
