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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qasnne/alignment.hpp"
#include "qasnne/errors.hpp"
#include "qasnne/types.hpp"

namespace qasnne {

// Semantic nearest-neighbour entropy:
//   -(1/n) sum_i log sum_{j != i} exp(S_ij / tau)
// Each inner sum is a log-sum-exp over the off-diagonal entries of row i.
template <typename Derived>
typename Derived::Scalar snne(const Eigen::MatrixBase<Derived>& s,
                              typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = s.rows();
  if (s.cols() != n) throw ValidationError("snne: similarity matrix not square");
  if (n < 2) throw ValidationError("snne: need at least 2 samples");
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw ValidationError("snne: temperature tau must be > 0");
  }
  Scalar total{0};
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar top = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) top = std::max(top, s(i, j) / tau);
    }
    Scalar acc{0};
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) acc += std::exp(s(i, j) / tau - top);
    }
    total += top + std::log(acc);
  }
  const Scalar u = -total / static_cast<Scalar>(n);
  if (!std::isfinite(u)) throw ValidationError("snne: non-finite result");
  return u;
}

// SNNE on the gated matrix diag(w) S diag(w).
template <typename DerivedS, typename DerivedW>
typename DerivedS::Scalar qa_snne(const Eigen::MatrixBase<DerivedS>& s_text,
                                  const Eigen::MatrixBase<DerivedW>& weights,
                                  typename DerivedS::Scalar tau,
                                  WeightScale scale = WeightScale::kSoftmax) {
  return snne(gate_similarity(s_text, weights, scale), tau);
}

template <typename DerivedS, typename Scalar>
Scalar qa_snne(const Eigen::MatrixBase<DerivedS>& s_text,
               const AlignmentScores<Scalar>& align, Scalar tau,
               WeightScale scale = WeightScale::kSoftmax) {
  if (align.weights.size() != s_text.rows()) {
    throw ValidationError("qa_snne: " + std::to_string(align.weights.size()) +
                          " alignment weights for " +
                          std::to_string(s_text.rows()) + " samples");
  }
  return qa_snne(s_text, align.weights, tau, scale);
}

// Checks the SimilarityMatrix invariants: square, symmetric within tol,
// finite, entries >= 0 and (for base matrices) <= 1.
template <typename Derived>
void validate_similarity(const Eigen::MatrixBase<Derived>& s, bool base,
                         double tol = 1e-9) {
  if (s.rows() != s.cols()) throw ValidationError("similarity matrix not square");
  if (!s.allFinite()) throw ValidationError("similarity matrix not finite");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("similarity matrix not symmetric");
  }
  if (s.minCoeff() < 0) throw ValidationError("negative similarity");
  if (base && s.maxCoeff() > 1 + tol) {
    throw ValidationError("base similarity above 1");
  }
}

enum class ClusterMethod { kEntailmentBidirectional, kRougeThreshold };

std::string_view to_string(ClusterMethod m);
ClusterMethod parse_cluster_method(std::string_view name);

struct SemanticClustering {
  std::vector<int> assignments;
  ClusterMethod method = ClusterMethod::kRougeThreshold;
  double threshold = 0.5;

  int cluster_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

// Greedy sequential clustering: sample i joins the first cluster whose
// representative (its first member) is equivalent to i, else founds a new
// cluster. `equivalent(i, rep)` is queried with rep < i.
SemanticClustering cluster_greedy(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& equivalent,
    ClusterMethod method, double threshold);

class NliScorer;

// Equivalence is ROUGE-L F >= threshold both ways (kRougeThreshold) or
// entailment as the top class both ways (kEntailmentBidirectional, which
// requires `nli`).
SemanticClustering cluster_semantic(std::span<const std::string> samples,
                                    ClusterMethod method, double threshold = 0.5,
                                    TokenizerMode mode = TokenizerMode::kDefault,
                                    NliScorer* nli = nullptr);

// Discrete semantic entropy of cluster frequencies, natural log.
double dse(const SemanticClustering& clustering);

}  // namespace qasnne
