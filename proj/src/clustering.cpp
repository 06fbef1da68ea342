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

#include <algorithm>
#include <cmath>

#include "qasnne/entropy.hpp"
#include "qasnne/scorer_client.hpp"
#include "qasnne/textsim.hpp"

namespace qasnne {
namespace {

bool entails(const NliClassLogits& l) {
  return l.entail > l.neutral && l.entail > l.contra;
}

}  // namespace

std::string_view to_string(ClusterMethod m) {
  return m == ClusterMethod::kRougeThreshold ? "rouge_threshold"
                                             : "entailment_bidirectional";
}

ClusterMethod parse_cluster_method(std::string_view name) {
  if (name == "rouge_threshold") return ClusterMethod::kRougeThreshold;
  if (name == "entailment_bidirectional") return ClusterMethod::kEntailmentBidirectional;
  throw ValidationError("unknown clustering method '" + std::string(name) + "'");
}

int SemanticClustering::cluster_count() const {
  if (assignments.empty()) return 0;
  return *std::max_element(assignments.begin(), assignments.end()) + 1;
}

std::vector<std::size_t> SemanticClustering::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(cluster_count()), 0);
  for (int c : assignments) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

SemanticClustering cluster_greedy(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& equivalent,
    ClusterMethod method, double threshold) {
  if (n < 2) throw ValidationError("clustering needs at least 2 samples");
  SemanticClustering out;
  out.method = method;
  out.threshold = threshold;
  out.assignments.assign(n, -1);
  std::vector<std::size_t> representatives;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < representatives.size(); ++c) {
      if (equivalent(i, representatives[c])) {
        out.assignments[i] = static_cast<int>(c);
        break;
      }
    }
    if (out.assignments[i] < 0) {
      out.assignments[i] = static_cast<int>(representatives.size());
      representatives.push_back(i);
    }
  }
  return out;
}

SemanticClustering cluster_semantic(std::span<const std::string> samples,
                                    ClusterMethod method, double threshold,
                                    TokenizerMode mode, NliScorer* nli) {
  if (method == ClusterMethod::kRougeThreshold) {
    std::vector<TokenSeq> tokens;
    tokens.reserve(samples.size());
    for (const auto& s : samples) tokens.push_back(tokenize(s, mode));
    return cluster_greedy(
        samples.size(),
        [&](std::size_t i, std::size_t rep) {
          return rouge_l(tokens[i], tokens[rep]).f >= threshold &&
                 rouge_l(tokens[rep], tokens[i]).f >= threshold;
        },
        method, threshold);
  }
  if (nli == nullptr) {
    throw BackendError("entailment_bidirectional clustering needs an NLI backend");
  }
  return cluster_greedy(
      samples.size(),
      [&](std::size_t i, std::size_t rep) {
        const NliPair pairs[2] = {{samples[i], samples[rep]}, {samples[rep], samples[i]}};
        const auto logits = nli->nli(pairs);
        return entails(logits[0]) && entails(logits[1]);
      },
      method, threshold);
}

double dse(const SemanticClustering& clustering) {
  const double n = static_cast<double>(clustering.assignments.size());
  if (n == 0) throw ValidationError("dse of an empty clustering");
  double h = 0.0;
  for (std::size_t size : clustering.cluster_sizes()) {
    if (size == 0) throw ValidationError("cluster ids are not contiguous");
    const double p = static_cast<double>(size) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace qasnne
