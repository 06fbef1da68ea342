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
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "qasnne/errors.hpp"
#include "qasnne/types.hpp"

namespace qasnne {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct AlignmentParams {
  double beta = 10.0;
  double gamma = 1.0;
  double lambda = 1.0;
  WeightScale weight_scale = WeightScale::kSoftmax;
};

// Entailment and contradiction logits in both directions,
// question->answer (fwd) and answer->question (bwd).
template <typename Scalar>
struct NliLogits {
  Scalar entail_fwd{0};
  Scalar contra_fwd{0};
  Scalar entail_bwd{0};
  Scalar contra_bwd{0};
};

template <typename Scalar>
struct AlignmentScores {
  Variant variant = Variant::kEmb;
  Vector<Scalar> alpha;
  Vector<Scalar> weights;
  Scalar beta{10};
  Scalar gamma{1};
  Scalar lambda{1};
};

namespace detail {

template <typename Scalar>
void require_finite(Scalar x, const char* what) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string(what) + " is not finite");
  }
}

}  // namespace detail

// Cosine similarity between a question embedding and an answer embedding.
template <typename DerivedQ, typename DerivedA>
typename DerivedQ::Scalar alpha_embedding(const Eigen::MatrixBase<DerivedQ>& e_q,
                                          const Eigen::MatrixBase<DerivedA>& e_a) {
  using Scalar = typename DerivedQ::Scalar;
  if (e_q.size() != e_a.size()) {
    throw ValidationError("embedding dimensions differ: " +
                          std::to_string(e_q.size()) + " vs " +
                          std::to_string(e_a.size()));
  }
  const Scalar nq = e_q.norm();
  const Scalar na = e_a.norm();
  if (!(nq > 0) || !(na > 0)) throw ValidationError("zero-norm embedding");
  if (!std::isfinite(nq) || !std::isfinite(na)) {
    throw ValidationError("non-finite embedding");
  }
  const Scalar c = e_q.dot(e_a.template cast<Scalar>()) / (nq * na);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

// gamma * (entail_fwd + entail_bwd) - lambda * (contra_fwd + contra_bwd)
template <typename Scalar>
Scalar alpha_entailment(const NliLogits<Scalar>& l, Scalar gamma, Scalar lambda) {
  detail::require_finite(l.entail_fwd, "entail_fwd logit");
  detail::require_finite(l.contra_fwd, "contra_fwd logit");
  detail::require_finite(l.entail_bwd, "entail_bwd logit");
  detail::require_finite(l.contra_bwd, "contra_bwd logit");
  return gamma * (l.entail_fwd + l.entail_bwd) -
         lambda * (l.contra_fwd + l.contra_bwd);
}

template <typename Scalar>
Scalar alpha_cross_encoder(Scalar relevance_logit) {
  detail::require_finite(relevance_logit, "relevance logit");
  return relevance_logit;
}

// Softmax of beta * alpha with max subtraction. beta == 0 yields uniform
// weights and is accepted for testing.
template <typename Derived>
Vector<typename Derived::Scalar> relevance_weights(
    const Eigen::MatrixBase<Derived>& alpha, typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  if (alpha.size() < 2) {
    throw ValidationError("relevance weights need at least 2 alignment scores");
  }
  if (!(beta >= 0) || !std::isfinite(beta)) {
    throw ValidationError("softmax sharpness beta must be finite and >= 0");
  }
  if (!alpha.allFinite()) {
    throw ValidationError("alignment scores must be finite");
  }
  const Scalar top = alpha.maxCoeff();
  Vector<Scalar> w = (beta * (alpha.array() - top)).exp().matrix();
  const Scalar z = w.sum();
  if (!(z > 0) || !std::isfinite(z)) {
    throw ValidationError("softmax normalizer degenerate");
  }
  return w / z;
}

// diag(w) * S * diag(w); with kSoftmaxTimesN the weights are first scaled
// by n.
template <typename DerivedS, typename DerivedW>
Matrix<typename DerivedS::Scalar> gate_similarity(
    const Eigen::MatrixBase<DerivedS>& s_text,
    const Eigen::MatrixBase<DerivedW>& weights,
    WeightScale scale = WeightScale::kSoftmax) {
  using Scalar = typename DerivedS::Scalar;
  if (s_text.rows() != s_text.cols() || s_text.rows() != weights.size()) {
    throw ValidationError("gate_similarity: dimension mismatch (" +
                          std::to_string(s_text.rows()) + "x" +
                          std::to_string(s_text.cols()) + " vs " +
                          std::to_string(weights.size()) + " weights)");
  }
  Vector<Scalar> w = weights.template cast<Scalar>();
  if (scale == WeightScale::kSoftmaxTimesN) {
    w *= static_cast<Scalar>(w.size());
  }
  return w.asDiagonal() * s_text * w.asDiagonal();
}

template <typename Derived>
AlignmentScores<typename Derived::Scalar> make_alignment_scores(
    Variant variant, const Eigen::MatrixBase<Derived>& alpha,
    const AlignmentParams& params) {
  using Scalar = typename Derived::Scalar;
  AlignmentScores<Scalar> out;
  out.variant = variant;
  out.alpha = alpha;
  out.beta = static_cast<Scalar>(params.beta);
  out.gamma = static_cast<Scalar>(params.gamma);
  out.lambda = static_cast<Scalar>(params.lambda);
  out.weights = relevance_weights(out.alpha, out.beta);
  return out;
}

}  // namespace qasnne
