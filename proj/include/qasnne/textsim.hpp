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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qasnne/types.hpp"

namespace qasnne {

struct TokenSeq {
  std::vector<std::string> tokens;
  std::size_t source_len = 0;  // bytes of the source text

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// Splits on whitespace and punctuation; punctuation is dropped. kDefault
// lower-cases (full Unicode case mapping), kCased keeps case.
TokenSeq tokenize(std::string_view text,
                  TokenizerMode mode = TokenizerMode::kDefault);

// Longest common subsequence length. O(|a||b|) time, O(min(|a|,|b|)) memory.
std::size_t lcs_len(std::span<const std::string> a,
                    std::span<const std::string> b);
inline std::size_t lcs_len(const TokenSeq& a, const TokenSeq& b) {
  return lcs_len(std::span<const std::string>(a.tokens),
                 std::span<const std::string>(b.tokens));
}

struct RougeLScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

// Balanced F (harmonic mean). All zero when either side is empty.
RougeLScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// Sentence BLEU with clipped n-gram counts, uniform weights and brevity
// penalty. A precision with zero matches is smoothed to 1/(total+1).
double bleu(const TokenSeq& candidate, const TokenSeq& reference,
            int max_n = 4);

// Pairwise ROUGE-L F over sampled answers. Diagonal is 1 and never read by
// the entropy estimators.
Eigen::MatrixXd base_similarity_matrix(
    std::span<const std::string> samples,
    TokenizerMode mode = TokenizerMode::kDefault);

Eigen::MatrixXd base_similarity_matrix(std::span<const TokenSeq> samples);

}  // namespace qasnne
