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

#include "qasnne/textsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "qasnne/errors.hpp"

namespace qasnne {
namespace {

struct NgramLess {
  bool operator()(std::span<const std::string> x,
                  std::span<const std::string> y) const {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  }
};

}  // namespace

TokenSeq tokenize(std::string_view text, TokenizerMode mode) {
  TokenSeq seq;
  seq.source_len = text.size();
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (mode == TokenizerMode::kDefault) u.toLower();

  icu::UnicodeString current;
  auto flush = [&] {
    if (current.isEmpty()) return;
    std::string token;
    current.toUTF8String(token);
    seq.tokens.push_back(std::move(token));
    current.remove();
  };
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) {
    const UChar32 c = u.char32At(i);
    if (u_isUWhiteSpace(c) || u_ispunct(c)) {
      flush();
    } else {
      current.append(c);
    }
  }
  flush();
  return seq;
}

std::size_t lcs_len(std::span<const std::string> a,
                    std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // b is the shorter side; one DP row of |b|+1.
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& x : a) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = (x == b[j - 1]) ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

RougeLScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto lcs = static_cast<double>(lcs_len(candidate, reference));
  if (lcs == 0) return {};
  RougeLScore s;
  s.precision = lcs / static_cast<double>(candidate.size());
  s.recall = lcs / static_cast<double>(reference.size());
  s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n) {
  if (max_n < 1) throw ValidationError("bleu max_n must be >= 1");
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto& c = candidate.tokens;
  const auto& r = reference.tokens;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto k = static_cast<std::size_t>(n);
    std::map<std::span<const std::string>, int, NgramLess> ref_counts;
    for (std::size_t i = 0; i + k <= r.size(); ++i) {
      ++ref_counts[std::span<const std::string>(r).subspan(i, k)];
    }
    std::size_t total = 0;
    std::size_t matches = 0;
    for (std::size_t i = 0; i + k <= c.size(); ++i) {
      ++total;
      auto it = ref_counts.find(std::span<const std::string>(c).subspan(i, k));
      if (it != ref_counts.end() && it->second > 0) {
        --it->second;  // clipping
        ++matches;
      }
    }
    const double p = matches > 0
                         ? static_cast<double>(matches) / static_cast<double>(total)
                         : 1.0 / static_cast<double>(total + 1);
    log_sum += std::log(p);
  }
  const double cl = static_cast<double>(c.size());
  const double rl = static_cast<double>(r.size());
  const double bp = cl > rl ? 1.0 : std::exp(1.0 - rl / cl);
  return bp * std::exp(log_sum / max_n);
}

Eigen::MatrixXd base_similarity_matrix(std::span<const TokenSeq> samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 2) {
    throw ValidationError("similarity matrix needs at least 2 samples");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double f = rouge_l(samples[i], samples[j]).f;
      s(i, j) = f;
      s(j, i) = f;
    }
  }
  return s;
}

Eigen::MatrixXd base_similarity_matrix(std::span<const std::string> samples,
                                       TokenizerMode mode) {
  std::vector<TokenSeq> tokens;
  tokens.reserve(samples.size());
  for (const auto& s : samples) tokens.push_back(tokenize(s, mode));
  return base_similarity_matrix(std::span<const TokenSeq>(tokens));
}

}  // namespace qasnne
