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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "qasnne/records.hpp"

namespace qasnne {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};  // doubles per retry
};

struct SamplingJob {
  std::filesystem::path dataset_path;
  GenerationConfig generation;
  int concurrency = 4;
  RetryPolicy retry;
  std::filesystem::path output_path;
  std::string api_key;  // sent as a bearer token when nonempty
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};

  void validate() const;
};

struct RecordSummary {
  std::string id;
  std::size_t requests = 0;
  int attempts = 0;  // attempts used by the most-retried request
  bool ok = false;
  std::string error;
};

struct SamplingSummary {
  std::size_t records_total = 0;
  std::size_t records_skipped = 0;  // already complete on disk
  std::size_t records_completed = 0;
  std::size_t records_failed = 0;
  std::size_t requests_sent = 0;
  std::size_t responses_ok = 0;
  std::size_t generations = 0;
  std::vector<RecordSummary> records;  // input order, skipped ones omitted

  Json to_json() const;
};

// Collects one greedy answer and n_samples sampled answers per record from a
// chat-completions endpoint, appending SampleSet lines to output_path in
// input order. Records already present in output_path are skipped. Failures
// after retries are recorded in the summary and the job continues.
SamplingSummary run_sampling(const SamplingJob& job);

// Request body for one chat-completions call.
Json chat_request(const GenerationConfig& config, const QARecord& record,
                  double temperature, int n);

}  // namespace qasnne
