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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace qasnne {

struct NliPair {
  std::string premise;
  std::string hypothesis;
};

struct NliClassLogits {
  double entail = 0;
  double neutral = 0;
  double contra = 0;
};

// Anything that can score premise/hypothesis pairs with three-class NLI.
class NliScorer {
 public:
  virtual ~NliScorer() = default;
  virtual std::vector<NliClassLogits> nli(std::span<const NliPair> pairs) = 0;
};

// Client for the scorer sidecar (/embed, /nli, /rerank, /health). Every
// response is checked for length, finiteness and index echo; violations
// raise BackendError.
class ScorerClient : public NliScorer {
 public:
  explicit ScorerClient(std::string base_url,
                        std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts);
  std::vector<NliClassLogits> nli(std::span<const NliPair> pairs) override;
  std::vector<double> rerank(const std::string& query,
                             std::span<const std::string> candidates);
  nlohmann::json health();

  const std::string& base_url() const { return base_url_; }

 private:
  nlohmann::json post(const std::string& route, const nlohmann::json& body);

  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace qasnne
