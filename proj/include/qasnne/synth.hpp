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
#include <string>
#include <vector>

#include "qasnne/records.hpp"

namespace qasnne {

struct SynthSpec {
  std::uint64_t seed = 20250611;
  int grounded = 100;
  int hallucinated = 100;
  int n_samples = 20;
  int embedding_dim = 16;
  // Hallucinated records whose samples agree with each other anyway. Off by
  // default: they score as confidently as the best grounded records, so any
  // nonzero rate bends the tail of the rejection curve down.
  double confident_hallucination_rate = 0.0;
  // Grounded records carrying question-irrelevant samples.
  double misaligned_mix_rate = 0.3;
};

struct SynthData {
  DatasetManifest manifest;
  std::vector<QARecord> records;
  std::vector<SampleSet> samples;
  std::vector<AlignmentRecord> emb;
  std::vector<AlignmentRecord> ent;
  std::vector<AlignmentRecord> crosse;
  std::vector<bool> planted_hallucination;
};

// Deterministic given spec.seed on every platform (own uniform/normal
// transforms over mt19937_64).
SynthData generate_synthetic(const SynthSpec& spec);

struct SynthPaths {
  std::filesystem::path dataset, samples, manifest;
  std::filesystem::path emb, ent, crosse;
};

SynthPaths synth_paths(const std::filesystem::path& dir);
SynthPaths write_synthetic(const SynthData& data, const std::filesystem::path& dir);

}  // namespace qasnne
