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

#include <array>
#include <string>
#include <string_view>

namespace qasnne {

// Question-answer alignment variant.
enum class Variant { kEmb, kEnt, kCrossE };

inline constexpr std::array<Variant, 3> kAllVariants = {
    Variant::kEmb, Variant::kEnt, Variant::kCrossE};

// How gating weights are scaled before row-column scaling. kSoftmax is the
// literal sum-to-one softmax; kSoftmaxTimesN rescales to mean one.
enum class WeightScale { kSoftmax, kSoftmaxTimesN };

enum class TokenizerMode { kDefault, kCased };

enum class Estimator { kDse, kSnne, kQaSnneEmb, kQaSnneEnt, kQaSnneCrossE };

inline constexpr std::array<Estimator, 5> kAllEstimators = {
    Estimator::kDse, Estimator::kSnne, Estimator::kQaSnneEmb,
    Estimator::kQaSnneEnt, Estimator::kQaSnneCrossE};

std::string_view to_string(Variant v);
std::string_view to_string(WeightScale s);
std::string_view to_string(TokenizerMode m);
std::string_view to_string(Estimator e);

// Parsers throw ValidationError on unknown names.
Variant parse_variant(std::string_view name);
WeightScale parse_weight_scale(std::string_view name);
TokenizerMode parse_tokenizer_mode(std::string_view name);
Estimator parse_estimator(std::string_view name);

Estimator estimator_for(Variant v);
bool is_qa_estimator(Estimator e);
Variant variant_of(Estimator e);

}  // namespace qasnne
