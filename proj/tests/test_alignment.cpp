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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qasnne/alignment.hpp"
#include "qasnne/alignment_source.hpp"
#include "qasnne/entropy.hpp"

namespace qasnne {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::MatrixXd random_similarity(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s(i, j) = s(j, i) = u(rng);
  return s;
}

TEST(AlphaEmbedding, Cosine) {
  EXPECT_DOUBLE_EQ(alpha_embedding(vec({0.3, -2, 5}), vec({0.3, -2, 5})), 1.0);
  EXPECT_DOUBLE_EQ(alpha_embedding(vec({0.3, -2, 5}), vec({-0.3, 2, -5})), -1.0);
  EXPECT_NEAR(alpha_embedding(vec({1, 0}), vec({1, 1})), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(alpha_embedding(vec({1, 0}), vec({1, 0, 0})), ValidationError);
  EXPECT_THROW(alpha_embedding(vec({0, 0}), vec({1, 0})), ValidationError);
  EXPECT_THROW(alpha_embedding(vec({NAN, 0}), vec({1, 0})), ValidationError);
}

TEST(AlphaEntailment, Substitution) {
  EXPECT_DOUBLE_EQ(alpha_entailment(NliLogits<double>{}, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(alpha_entailment(NliLogits<double>{2, 0, 2, 0}, 1.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(alpha_entailment(NliLogits<double>{0, 1, 0, 1}, 1.0, 2.0), -4.0);
  EXPECT_THROW(alpha_entailment(NliLogits<double>{INFINITY, 0, 0, 0}, 1.0, 1.0),
               ValidationError);
}

TEST(AlphaCrossEncoder, Identity) {
  EXPECT_DOUBLE_EQ(alpha_cross_encoder(3.2), 3.2);
  EXPECT_DOUBLE_EQ(alpha_cross_encoder(-1.0), -1.0);
  EXPECT_DOUBLE_EQ(alpha_cross_encoder(0.0), 0.0);
  EXPECT_THROW(alpha_cross_encoder(std::nan("")), ValidationError);
}

TEST(RelevanceWeights, FrozenTwoPointValue) {
  // High-precision reference: softmax(10 * (1, 0)).
  const auto w = relevance_weights(vec({1, 0}), 10.0);
  EXPECT_NEAR(w(0), 0.99995460213129756561, 1e-15);
  EXPECT_NEAR(w(1), 4.5397868702434394505e-5, 1e-18);
}

TEST(RelevanceWeights, UniformCases) {
  const auto eq = relevance_weights(vec({0.7, 0.7, 0.7, 0.7}), 10.0);
  EXPECT_TRUE(eq.isApproxToConstant(0.25));
  const auto flat = relevance_weights(vec({5, -3, 0.1}), 0.0);
  EXPECT_TRUE(flat.isApproxToConstant(1.0 / 3.0));
}

TEST(RelevanceWeights, LargeAlphaDoesNotOverflow) {
  const auto w = relevance_weights(vec({1e6, 1e6 - 1, -1e6}), 10.0);
  EXPECT_TRUE(w.allFinite());
  EXPECT_NEAR(w.sum(), 1.0, 1e-12);
}

TEST(RelevanceWeights, Errors) {
  EXPECT_THROW(relevance_weights(vec({1}), 10.0), ValidationError);
  EXPECT_THROW(relevance_weights(vec({1, 2}), -1.0), ValidationError);
  EXPECT_THROW(relevance_weights(vec({-INFINITY, -INFINITY}), 1.0), ValidationError);
  EXPECT_THROW(relevance_weights(vec({1, NAN}), 1.0), ValidationError);
}

TEST(RelevanceWeights, ShiftInvarianceAndSumProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 2);
  for (int iter = 0; iter < 200; ++iter) {
    const int n = 2 + static_cast<int>(rng() % 19);
    Eigen::VectorXd a(n);
    for (auto& x : a) x = g(rng);
    const double c = g(rng) * 10;
    const auto w = relevance_weights(a, 10.0);
    const auto ws = relevance_weights((a.array() + c).matrix(), 10.0);
    ASSERT_LE((w - ws).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_NEAR(w.sum(), 1.0, 1e-9);
    ASSERT_TRUE((w.array() > 0).all());
  }
}

TEST(RelevanceWeights, MaxWeightGrowsWithBeta) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd a(8);
    for (auto& x : a) x = g(rng);
    double prev = 0;
    for (double beta : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
      const double top = relevance_weights(a, beta).maxCoeff();
      ASSERT_GE(top, prev);
      prev = top;
    }
  }
}

TEST(Gating, ClosedForms) {
  const Eigen::Index n = 5;
  Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(n, n, 1.0);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
  const auto g = gate_similarity(ones, uniform);
  EXPECT_TRUE(g.isApproxToConstant(1.0 / (n * n)));
  EXPECT_TRUE(gate_similarity(ones, uniform, WeightScale::kSoftmaxTimesN).isApproxToConstant(1.0));
  EXPECT_TRUE(gate_similarity(Eigen::MatrixXd::Zero(n, n), uniform).isZero());
  EXPECT_THROW(gate_similarity(ones, Eigen::VectorXd::Ones(4)), ValidationError);
}

TEST(Gating, MatchesExplicitProduct) {
  std::mt19937_64 rng(9);
  const auto s = random_similarity(rng, 3);
  const Eigen::VectorXd w = relevance_weights(vec({0.2, 0.9, -0.4}), 10.0);
  const auto g = gate_similarity(s, w);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), w(i) * s(i, j) * w(j), 1e-15);
}

TEST(Gating, PreservesSymmetryAndNonNegativity) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0, 1);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 19);
    const auto s = random_similarity(rng, n);
    Eigen::VectorXd a(n);
    for (auto& x : a) x = g(rng);
    const auto q = gate_similarity(s, relevance_weights(a, 10.0));
    ASSERT_NO_THROW(validate_similarity(q, false));
    ASSERT_TRUE(((q - s).array() <= 0).all());
  }
}

TEST(Gating, FloatScalarCompiles) {
  Eigen::MatrixXf s = Eigen::MatrixXf::Identity(3, 3);
  s(0, 1) = s(1, 0) = 0.5f;
  const Eigen::VectorXf w = relevance_weights(Eigen::Vector3f(1.f, 0.f, 0.5f), 10.0f);
  const float u = qa_snne(s, w, 1.0f);
  EXPECT_TRUE(std::isfinite(u));
}

TEST(AlignmentSource, StoredAlphaWins) {
  AlignmentRecord rec;
  rec.id = "r1";
  rec.variant = Variant::kCrossE;
  rec.alpha = std::vector<double>{0.5, 0.25};
  AlignmentPayload p;
  p.rel = 99.0;
  rec.samples = {p, p};
  const auto a = alphas_from_payload(rec, AlignmentParams{});
  EXPECT_DOUBLE_EQ(a(0), 0.5);
  EXPECT_DOUBLE_EQ(a(1), 0.25);
}

TEST(AlignmentSource, PayloadFormulas) {
  AlignmentRecord ent;
  ent.id = "e";
  ent.variant = Variant::kEnt;
  AlignmentPayload p;
  p.nli = RawNli{2, 0, 2, 0};
  ent.samples = {p, p};
  AlignmentParams params;
  EXPECT_DOUBLE_EQ(alphas_from_payload(ent, params)(0), 4.0);
  params.lambda = 2;
  p.nli = RawNli{0, 1, 0, 1};
  ent.samples = {p, p};
  EXPECT_DOUBLE_EQ(alphas_from_payload(ent, params)(1), -4.0);

  AlignmentRecord emb;
  emb.id = "m";
  emb.variant = Variant::kEmb;
  emb.question_embedding = std::vector<double>{1, 0};
  AlignmentPayload pa, pb;
  pa.embedding = std::vector<double>{1, 1};
  pb.embedding = std::vector<double>{0, 3};
  emb.samples = {pa, pb};
  const auto a = alphas_from_payload(emb, AlignmentParams{});
  EXPECT_NEAR(a(0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a(1), 0.0, 1e-15);
}

TEST(AlignmentSource, PrecomputedChecksLengthAndVariant) {
  PrecomputedAlignments pre;
  AlignmentRecord rec;
  rec.id = "r1";
  rec.variant = Variant::kCrossE;
  rec.alpha = std::vector<double>{0.1, 0.2, 0.3};
  pre.add(rec);
  EXPECT_TRUE(pre.provides(Variant::kCrossE));
  EXPECT_FALSE(pre.provides(Variant::kEmb));

  QARecord q;
  q.id = "r1";
  q.samples = std::vector<std::string>{"a", "b"};
  EXPECT_THROW(pre.alphas(q, Variant::kCrossE, AlignmentParams{}), ValidationError);
  q.samples->push_back("c");
  EXPECT_EQ(pre.alphas(q, Variant::kCrossE, AlignmentParams{}).size(), 3);
  q.id = "missing";
  EXPECT_THROW(pre.alphas(q, Variant::kCrossE, AlignmentParams{}), ValidationError);
}

}  // namespace
}  // namespace qasnne
