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

#include <filesystem>
#include <string>
#include <vector>

#include "qasnne/alignment_source.hpp"
#include "qasnne/config.hpp"
#include "qasnne/eval.hpp"
#include "qasnne/records.hpp"

namespace qasnne {

// Stages communicate only through files. Each returns the artifacts it
// wrote and any non-fatal warnings (unmatched ids, skipped records).
struct StageResult {
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;
  Json summary = Json::object();
};

// Writes <artifact>.meta.json holding the config hash and inline config.
void write_meta(const std::filesystem::path& artifact, const RunConfig& config);

// Dataset records joined with their samples file. With an empty
// samples_path the dataset lines must already carry samples.
std::vector<QARecord> load_sampled_records(const std::filesystem::path& dataset_path,
                                           const std::filesystem::path& samples_path,
                                           std::vector<std::string>& warnings);

// Estimators that `run_score` will compute for this config and source.
std::vector<Estimator> resolve_estimators(const RunConfig& config,
                                          const AlignmentSource* source);

UncertaintyResult score_record(const QARecord& record, const RunConfig& config,
                               std::span<const Estimator> estimators,
                               AlignmentSource* source, NliScorer* nli,
                               const std::string& hash);

StageResult run_sample(const RunConfig& config, const std::filesystem::path& dataset,
                       const std::filesystem::path& out);
StageResult run_label(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, const std::filesystem::path& out);
StageResult run_align(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, Variant variant,
                      const std::filesystem::path& out);
StageResult run_score(const RunConfig& config, const std::filesystem::path& dataset,
                      const std::filesystem::path& samples, const std::filesystem::path& out);
StageResult run_evaluate(const RunConfig& config, const std::filesystem::path& labels,
                         const std::filesystem::path& results,
                         const std::filesystem::path& manifest,
                         const std::filesystem::path& out_dir);
StageResult run_prc(const RunConfig& config, const std::filesystem::path& labels,
                    const std::filesystem::path& results, Estimator estimator,
                    const std::filesystem::path& out_csv);
StageResult run_compare(const std::filesystem::path& report_in,
                        const std::filesystem::path& report_out, double alert_margin,
                        const std::filesystem::path& out_dir);
StageResult run_synth(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace qasnne
