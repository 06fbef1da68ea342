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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qasnne/records.hpp"
#include "qasnne/textsim.hpp"
#include "qasnne/types.hpp"

namespace qasnne {

// Ground-truth label from the greedy answer: hallucination iff
// rouge_f < label_threshold (strict).
HallucinationLabel label_record(const QARecord& record, double label_threshold = 0.5,
                                TokenizerMode mode = TokenizerMode::kDefault);

std::vector<HallucinationLabel> label_hallucinations(
    std::span<const QARecord> records, double label_threshold = 0.5,
    TokenizerMode mode = TokenizerMode::kDefault);

struct DetectionOutcome {
  std::string id;
  bool predicted_hallucination = false;
  double score = 0.0;
  double theta_star = -3.5;
};

// Flags a hallucination iff score >= theta_star. DSE lives on a different
// scale from the SNNE family and is refused unless allow_dse is set.
std::vector<DetectionOutcome> detect(std::span<const UncertaintyResult> results,
                                     Estimator estimator, double theta_star = -3.5,
                                     bool allow_dse = false);

// Mann-Whitney AUROC with mid-ranks: P(pos > neg) + 0.5 P(pos == neg).
// Positives are hallucinations; higher scores mean more uncertain.
// Throws ValidationError when only one class is present.
double auroc(const std::vector<bool>& is_positive, std::span<const double> scores);

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(std::span<const DetectionOutcome> outcomes,
                          std::span<const HallucinationLabel> labels);

// Fraction of ids where the prediction matches the label. Both sides must
// cover exactly the same ids.
double accuracy(std::span<const DetectionOutcome> outcomes,
                std::span<const HallucinationLabel> labels);

struct PrcPoint {
  double rejection_fraction = 0.0;
  std::size_t retained_count = 0;
  double mean_rouge_l = 0.0;  // NaN when nothing is retained
};

// 0.00, 0.05, ..., 0.95
std::vector<double> default_rejection_fractions();

// Number of records rejected at fraction r of n: ceil(r * n), with r * n
// snapped to the nearest integer when within 1e-9 of it.
std::size_t rejected_count(double r, std::size_t n);

// Performance-rejection curve: reject the ceil(r N) most uncertain records
// (stable on ties) and average the utility of the rest, summed in input
// order.
std::vector<PrcPoint> prc(std::span<const double> uncertainty,
                          std::span<const double> utility,
                          std::span<const double> fractions);

struct EstimatorMetrics {
  std::optional<double> auroc;
  std::optional<double> accuracy;
  std::vector<PrcPoint> prc;
};

struct EvalOptions {
  double theta_star = -3.5;
  bool allow_dse_detection = false;
  std::vector<Estimator> estimators;  // empty: every estimator in the results
  std::vector<double> fractions = default_rejection_fractions();
};

struct DatasetInfo {
  std::string name;
  std::optional<Split> split;
  std::optional<std::string> paired_with;
  std::string id_digest;
};

struct EvalReport {
  DatasetInfo dataset;
  std::size_t records = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double mean_bleu = 0.0;
  double mean_rouge_l = 0.0;
  std::map<Estimator, EstimatorMetrics> estimators;
  std::vector<std::string> unmatched_labels;
  std::vector<std::string> unmatched_results;
  Json provenance = Json::object();
  std::string config_hash;
};

EvalReport build_report(std::span<const HallucinationLabel> labels,
                        std::span<const UncertaintyResult> results,
                        const EvalOptions& options, DatasetInfo dataset = {});

Json to_json(const EvalReport& report);
EvalReport report_from_json(const Json& j);
std::string to_text(const EvalReport& report);
// CSV with header rejection_fraction,retained_count,mean_rouge_l
std::string prc_csv(std::span<const PrcPoint> curve);

struct MetricDelta {
  std::string metric;
  double in = 0.0;
  double out = 0.0;
  double delta = 0.0;  // out - in, quantized to 1e-9
  bool alert = false;  // delta < -alert_margin
};

struct DeltaReport {
  std::string in_name;
  std::string out_name;
  double alert_margin = 0.05;
  std::vector<MetricDelta> deltas;
};

// Per-metric out - in deltas for utility, AUROC and accuracy. Requires the
// two reports to come from paired datasets.
DeltaReport compare_splits(const EvalReport& report_in, const EvalReport& report_out,
                           double alert_margin = 0.05);

Json to_json(const DeltaReport& d);
std::string to_text(const DeltaReport& d);

}  // namespace qasnne
