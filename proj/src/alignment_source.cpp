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

#include "qasnne/alignment_source.hpp"

namespace qasnne {

Eigen::VectorXd alphas_from_payload(const AlignmentRecord& rec,
                                    const AlignmentParams& params) {
  if (rec.alpha) {
    return Eigen::Map<const Eigen::VectorXd>(rec.alpha->data(),
                                             static_cast<Eigen::Index>(rec.alpha->size()));
  }
  const auto n = static_cast<Eigen::Index>(rec.samples.size());
  Eigen::VectorXd alpha(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const AlignmentPayload& p = rec.samples[static_cast<std::size_t>(i)];
    switch (rec.variant) {
      case Variant::kEmb: {
        if (!p.embedding || !rec.question_embedding) {
          throw ValidationError("record '" + rec.id + "': Emb payload incomplete");
        }
        const auto& q = *rec.question_embedding;
        const auto& a = *p.embedding;
        alpha(i) = alpha_embedding(
            Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())),
            Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
        break;
      }
      case Variant::kEnt: {
        if (!p.nli) throw ValidationError("record '" + rec.id + "': Ent payload incomplete");
        alpha(i) = alpha_entailment(
            NliLogits<double>{p.nli->ef, p.nli->cf, p.nli->eb, p.nli->cb},
            params.gamma, params.lambda);
        break;
      }
      case Variant::kCrossE: {
        if (!p.rel) throw ValidationError("record '" + rec.id + "': CrossE payload incomplete");
        alpha(i) = alpha_cross_encoder(*p.rel);
        break;
      }
    }
  }
  return alpha;
}

void PrecomputedAlignments::add_file(const std::filesystem::path& path) {
  auto stream = load_alignments(path);
  std::optional<Variant> file_variant;
  while (auto rec = stream.next()) {
    if (file_variant && *file_variant != rec->variant) {
      throw ValidationError(path.string() + ":" + std::to_string(stream.line_number()) +
                            ": mixed variants in one alignment file");
    }
    file_variant = rec->variant;
    add(std::move(*rec));
  }
  files_.push_back(path.string());
}

void PrecomputedAlignments::add(AlignmentRecord rec) {
  auto& table = by_variant_[rec.variant];
  const std::string id = rec.id;
  if (!table.emplace(id, std::move(rec)).second) {
    throw ValidationError("duplicate alignment for id '" + id + "'");
  }
}

Eigen::VectorXd PrecomputedAlignments::alphas(const QARecord& record, Variant variant,
                                              const AlignmentParams& params) {
  auto vt = by_variant_.find(variant);
  if (vt == by_variant_.end()) {
    throw ValidationError("no alignment file loaded for variant " +
                          std::string(to_string(variant)));
  }
  auto it = vt->second.find(record.id);
  if (it == vt->second.end()) {
    throw ValidationError("no " + std::string(to_string(variant)) +
                          " alignment for record '" + record.id + "'");
  }
  Eigen::VectorXd alpha = alphas_from_payload(it->second, params);
  if (static_cast<std::size_t>(alpha.size()) != record.n()) {
    throw ValidationError("record '" + record.id + "': " + std::to_string(alpha.size()) +
                          " alignment scores for " + std::to_string(record.n()) +
                          " samples");
  }
  return alpha;
}

bool PrecomputedAlignments::provides(Variant variant) const {
  return by_variant_.count(variant) > 0;
}

std::string PrecomputedAlignments::describe() const {
  std::string s = "precomputed:";
  for (std::size_t i = 0; i < files_.size(); ++i) s += (i ? "," : "") + files_[i];
  return s;
}

AlignmentRecord ServiceAlignments::fetch(const QARecord& record, Variant variant) {
  if (!record.samples) {
    throw ValidationError("record '" + record.id + "' has no samples to align");
  }
  const auto& samples = *record.samples;
  AlignmentRecord out;
  out.id = record.id;
  out.variant = variant;
  switch (variant) {
    case Variant::kEmb: {
      std::vector<std::string> texts;
      texts.reserve(samples.size() + 1);
      texts.push_back(record.question);
      texts.insert(texts.end(), samples.begin(), samples.end());
      const auto vecs = client_.embed(texts);
      out.question_embedding = std::vector<double>(vecs[0].data(), vecs[0].data() + vecs[0].size());
      for (std::size_t i = 1; i < vecs.size(); ++i) {
        AlignmentPayload p;
        p.embedding = std::vector<double>(vecs[i].data(), vecs[i].data() + vecs[i].size());
        out.samples.push_back(std::move(p));
      }
      break;
    }
    case Variant::kEnt: {
      std::vector<NliPair> pairs;
      pairs.reserve(2 * samples.size());
      for (const auto& a : samples) {
        pairs.push_back({record.question, a});
        pairs.push_back({a, record.question});
      }
      const auto logits = client_.nli(pairs);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& fwd = logits[2 * i];
        const auto& bwd = logits[2 * i + 1];
        AlignmentPayload p;
        p.nli = RawNli{fwd.entail, fwd.contra, bwd.entail, bwd.contra};
        out.samples.push_back(p);
      }
      break;
    }
    case Variant::kCrossE: {
      const auto logits = client_.rerank(record.question, samples);
      for (double l : logits) {
        AlignmentPayload p;
        p.rel = l;
        out.samples.push_back(p);
      }
      break;
    }
  }
  return out;
}

Eigen::VectorXd ServiceAlignments::alphas(const QARecord& record, Variant variant,
                                          const AlignmentParams& params) {
  return alphas_from_payload(fetch(record, variant), params);
}

std::string ServiceAlignments::describe() const {
  return "scorer-service:" + client_.base_url();
}

}  // namespace qasnne
