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

#include "qasnne/types.hpp"

#include "qasnne/errors.hpp"

namespace qasnne {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kEmb: return "Emb";
    case Variant::kEnt: return "Ent";
    case Variant::kCrossE: return "CrossE";
  }
  return "?";
}

std::string_view to_string(WeightScale s) {
  return s == WeightScale::kSoftmax ? "softmax" : "softmax_times_n";
}

std::string_view to_string(TokenizerMode m) {
  return m == TokenizerMode::kDefault ? "default" : "cased";
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kDse: return "dse";
    case Estimator::kSnne: return "snne";
    case Estimator::kQaSnneEmb: return "qa_snne_emb";
    case Estimator::kQaSnneEnt: return "qa_snne_ent";
    case Estimator::kQaSnneCrossE: return "qa_snne_crosse";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (name == to_string(v)) return v;
  }
  if (name == "emb") return Variant::kEmb;
  if (name == "ent") return Variant::kEnt;
  if (name == "crosse") return Variant::kCrossE;
  throw ValidationError("unknown alignment variant '" + std::string(name) +
                        "' (expected Emb, Ent or CrossE)");
}

WeightScale parse_weight_scale(std::string_view name) {
  if (name == "softmax") return WeightScale::kSoftmax;
  if (name == "softmax_times_n") return WeightScale::kSoftmaxTimesN;
  throw ValidationError("unknown weight_scale '" + std::string(name) + "'");
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "default") return TokenizerMode::kDefault;
  if (name == "cased") return TokenizerMode::kCased;
  throw ValidationError("unknown tokenizer mode '" + std::string(name) + "'");
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : kAllEstimators) {
    if (name == to_string(e)) return e;
  }
  throw ValidationError("unknown estimator '" + std::string(name) + "'");
}

Estimator estimator_for(Variant v) {
  switch (v) {
    case Variant::kEmb: return Estimator::kQaSnneEmb;
    case Variant::kEnt: return Estimator::kQaSnneEnt;
    case Variant::kCrossE: return Estimator::kQaSnneCrossE;
  }
  return Estimator::kQaSnneEmb;
}

bool is_qa_estimator(Estimator e) {
  return e == Estimator::kQaSnneEmb || e == Estimator::kQaSnneEnt ||
         e == Estimator::kQaSnneCrossE;
}

Variant variant_of(Estimator e) {
  switch (e) {
    case Estimator::kQaSnneEmb: return Variant::kEmb;
    case Estimator::kQaSnneEnt: return Variant::kEnt;
    case Estimator::kQaSnneCrossE: return Variant::kCrossE;
    default: break;
  }
  throw ValidationError("estimator '" + std::string(to_string(e)) +
                        "' has no alignment variant");
}

}  // namespace qasnne
