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
#include <map>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "qasnne/alignment.hpp"
#include "qasnne/records.hpp"
#include "qasnne/scorer_client.hpp"

namespace qasnne {

// Turns one alignment line into alpha values. A stored alpha[] wins over raw
// payloads; otherwise the variant's formula is applied per sample.
Eigen::VectorXd alphas_from_payload(const AlignmentRecord& rec,
                                    const AlignmentParams& params);

// Supplies per-sample alignment scores for a record, in sample order.
class AlignmentSource {
 public:
  virtual ~AlignmentSource() = default;
  virtual Eigen::VectorXd alphas(const QARecord& record, Variant variant,
                                 const AlignmentParams& params) = 0;
  virtual bool provides(Variant variant) const = 0;
  virtual std::string describe() const = 0;
};

// Alignment lines loaded from JSONL files, one file per variant.
class PrecomputedAlignments : public AlignmentSource {
 public:
  void add_file(const std::filesystem::path& path);
  void add(AlignmentRecord rec);

  Eigen::VectorXd alphas(const QARecord& record, Variant variant,
                         const AlignmentParams& params) override;
  bool provides(Variant variant) const override;
  std::string describe() const override;

 private:
  std::map<Variant, std::unordered_map<std::string, AlignmentRecord>> by_variant_;
  std::vector<std::string> files_;
};

// Fetches raw scorer outputs from the scorer-service, one batched call per
// record.
class ServiceAlignments : public AlignmentSource {
 public:
  explicit ServiceAlignments(ScorerClient& client) : client_(client) {}

  AlignmentRecord fetch(const QARecord& record, Variant variant);

  Eigen::VectorXd alphas(const QARecord& record, Variant variant,
                         const AlignmentParams& params) override;
  bool provides(Variant) const override { return true; }
  std::string describe() const override;

 private:
  ScorerClient& client_;
};

}  // namespace qasnne
