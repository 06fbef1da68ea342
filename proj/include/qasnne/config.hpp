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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qasnne/alignment.hpp"
#include "qasnne/entropy.hpp"
#include "qasnne/records.hpp"
#include "qasnne/sampler.hpp"

namespace qasnne {

// 64-bit FNV-1a, lower-case hex.
std::string fnv1a64_hex(std::string_view bytes);

enum class BackendKind { kPrecomputed, kService };

// Effective settings for one pipeline run. Defaults reproduce the reference
// protocol: T=0.1 / 1.0, n=20, top-k=50, top-p=0.9, label threshold 0.5,
// theta*=-3.5, beta=10.
struct RunConfig {
  struct Data {
    std::string dataset;
    std::string samples;
    std::string manifest;
    std::string labels;
    std::string results;
  } data;

  GenerationConfig generation;

  struct Sampling {
    int concurrency = 4;
    int max_attempts = 3;
    int backoff_ms = 500;
    int timeout_ms = 120000;
  } sampling;

  TokenizerMode tokenizer = TokenizerMode::kDefault;
  double label_threshold = 0.5;

  struct Scoring {
    double tau = 1.0;
    AlignmentParams alignment;
    std::vector<Estimator> estimators;  // empty: every estimator with inputs
    ClusterMethod dse_method = ClusterMethod::kRougeThreshold;
    double dse_threshold = 0.5;
    int workers = 1;
  } scoring;

  struct Detection {
    double theta_star = -3.5;
    bool allow_dse = false;
  } detection;

  struct Backend {
    BackendKind kind = BackendKind::kPrecomputed;
    std::string scorer_url;
    std::map<Variant, std::string> alignment_files;
  } backend;

  struct Synth {
    std::uint64_t seed = 20250611;
    int grounded = 100;
    int hallucinated = 100;
    int n_samples = 20;
  } synth;

  std::string output_dir = "out";

  void validate() const;
};

Json to_json(const RunConfig& c);
// Unknown sections or keys are rejected. Missing keys keep their defaults.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

// Hash of the canonical (key-sorted, compact) JSON form of the config.
std::string config_hash(const RunConfig& c);

}  // namespace qasnne
