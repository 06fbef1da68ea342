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

#include "qasnne/records.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qasnne/text_normalize.hpp"

namespace qasnne {
namespace {

[[noreturn]] void missing(std::string_view field) {
  throw ValidationError("missing required field '" + std::string(field) + "'");
}

const Json& require(const Json& j, std::string_view field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) missing(field);
  return *it;
}

std::string require_text(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_string()) {
    throw ValidationError("field '" + std::string(field) + "' must be a string");
  }
  std::string text = normalize_text(v.get_ref<const std::string&>());
  if (text.empty()) {
    throw ValidationError("field '" + std::string(field) + "' is empty");
  }
  return text;
}

double require_number(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_number()) {
    throw ValidationError("field '" + std::string(field) + "' must be a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ValidationError("field '" + std::string(field) + "' is not finite");
  }
  return x;
}

std::vector<double> number_array(const Json& v, std::string_view field) {
  if (!v.is_array()) {
    throw ValidationError("field '" + std::string(field) + "' must be an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      throw ValidationError("field '" + std::string(field) +
                            "' must hold finite numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> sample_texts(const Json& v) {
  if (!v.is_array()) throw ValidationError("field 'samples' must be an array");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      throw ValidationError("samples[" + std::to_string(i) +
                            "] must be a string");
    }
    std::string s = normalize_text(v[i].get_ref<const std::string&>());
    if (s.empty()) {
      throw ValidationError("samples[" + std::to_string(i) +
                            "] is empty after normalization");
    }
    out.push_back(std::move(s));
  }
  if (out.size() < 2) {
    throw ValidationError("need at least 2 samples, got " +
                          std::to_string(out.size()));
  }
  return out;
}

std::vector<std::string> sorted_ids(std::span<const QARecord> records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kInTemplate: return "in_template";
    case Split::kOutOfTemplate: return "out_of_template";
    case Split::kExternal: return "external";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "in_template") return Split::kInTemplate;
  if (name == "out_of_template") return Split::kOutOfTemplate;
  if (name == "external") return Split::kExternal;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

void GenerationConfig::validate() const {
  if (!(greedy_temperature > 0) || !(sample_temperature > 0)) {
    throw ValidationError("generation temperatures must be > 0");
  }
  if (n_samples < 2) throw ValidationError("n_samples must be >= 2");
  if (top_k < 0) throw ValidationError("top_k must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) {
    throw ValidationError("top_p must lie in (0, 1]");
  }
}

Json to_json(const GenerationConfig& c) {
  return Json{{"greedy_temperature", c.greedy_temperature},
              {"sample_temperature", c.sample_temperature},
              {"n_samples", c.n_samples},
              {"top_k", c.top_k},
              {"top_p", c.top_p},
              {"prompt_template", c.prompt_template},
              {"model_name", c.model_name},
              {"endpoint_url", c.endpoint_url}};
}

GenerationConfig generation_config_from_json(const Json& j) {
  if (!j.is_object()) {
    throw ValidationError("generation_config must be an object");
  }
  GenerationConfig c;
  c.greedy_temperature = j.value("greedy_temperature", c.greedy_temperature);
  c.sample_temperature = j.value("sample_temperature", c.sample_temperature);
  c.n_samples = j.value("n_samples", c.n_samples);
  c.top_k = j.value("top_k", c.top_k);
  c.top_p = j.value("top_p", c.top_p);
  c.prompt_template = j.value("prompt_template", c.prompt_template);
  c.model_name = j.value("model_name", c.model_name);
  c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
  c.validate();
  return c;
}

Json to_json(const DatasetManifest& m) {
  Json j{{"name", m.name},
         {"split", to_string(m.split)},
         {"record_count", m.record_count}};
  j["paired_with"] = m.paired_with ? Json(*m.paired_with) : Json(nullptr);
  if (m.generation_config) j["generation_config"] = to_json(*m.generation_config);
  return j;
}

DatasetManifest manifest_from_json(const Json& j) {
  DatasetManifest m;
  const Json& name = require(j, "name");
  if (!name.is_string() || name.get<std::string>().empty()) {
    throw ValidationError("manifest 'name' must be a nonempty string");
  }
  m.name = name.get<std::string>();
  m.split = parse_split(require(j, "split").get<std::string>());
  m.record_count = j.value("record_count", std::size_t{0});
  if (j.contains("paired_with") && !j["paired_with"].is_null()) {
    m.paired_with = j["paired_with"].get<std::string>();
  }
  if (j.contains("generation_config")) {
    m.generation_config = generation_config_from_json(j["generation_config"]);
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  try {
    return manifest_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

QARecord record_from_json(const Json& j, Schema schema) {
  QARecord r;
  const Json& id = require(j, "id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ValidationError("field 'id' must be a nonempty string");
  }
  r.id = id.get<std::string>();
  r.question = require_text(j, "question");
  r.reference_answer = require_text(j, "reference_answer");
  if (schema == Schema::kSampled || j.contains("greedy_answer")) {
    r.greedy_answer = require_text(j, "greedy_answer");
  }
  if (schema == Schema::kSampled || j.contains("samples")) {
    r.samples = sample_texts(require(j, "samples"));
  }
  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("field 'meta' must be an object");
    r.meta = *it;
  }
  return r;
}

SampleSet sample_set_from_json(const Json& j) {
  SampleSet s;
  const Json& id = require(j, "id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ValidationError("field 'id' must be a nonempty string");
  }
  s.id = id.get<std::string>();
  s.greedy_answer = require_text(j, "greedy_answer");
  s.samples = sample_texts(require(j, "samples"));
  if (auto it = j.find("generation_config"); it != j.end() && !it->is_null()) {
    s.generation_config = generation_config_from_json(*it);
  }
  return s;
}

AlignmentRecord alignment_from_json(const Json& j) {
  AlignmentRecord a;
  a.id = require(j, "id").get<std::string>();
  if (a.id.empty()) throw ValidationError("field 'id' must be nonempty");
  a.variant = parse_variant(require(j, "variant").get<std::string>());
  if (auto it = j.find("alpha"); it != j.end()) {
    a.alpha = number_array(*it, "alpha");
  }
  if (auto it = j.find("question_embedding"); it != j.end()) {
    a.question_embedding = number_array(*it, "question_embedding");
  }
  if (auto it = j.find("samples"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("field 'samples' must be an array");
    for (const auto& p : *it) {
      AlignmentPayload payload;
      switch (a.variant) {
        case Variant::kEmb:
          payload.embedding = number_array(require(p, "embedding"), "embedding");
          break;
        case Variant::kEnt: {
          const Json& nli = require(p, "nli");
          payload.nli = RawNli{require_number(nli, "ef"), require_number(nli, "cf"),
                               require_number(nli, "eb"), require_number(nli, "cb")};
          break;
        }
        case Variant::kCrossE:
          payload.rel = require_number(p, "rel");
          break;
      }
      a.samples.push_back(std::move(payload));
    }
  }
  if (!a.alpha && a.samples.empty()) {
    throw ValidationError("alignment line needs 'alpha' or 'samples'");
  }
  if (a.alpha && !a.samples.empty() && a.alpha->size() != a.samples.size()) {
    throw ValidationError("'alpha' and 'samples' lengths differ");
  }
  if (a.variant == Variant::kEmb && !a.samples.empty() && !a.question_embedding) {
    missing("question_embedding");
  }
  if (a.n() < 2) throw ValidationError("need at least 2 alignment entries");
  return a;
}

UncertaintyResult result_from_json(const Json& j) {
  UncertaintyResult r;
  r.id = require(j, "id").get<std::string>();
  r.n = require(j, "n").get<int>();
  r.tau = require_number(j, "tau");
  r.config_hash = j.value("config_hash", std::string{});
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    r.label = it->get<bool>();
  }
  const Json& scores = require(j, "scores");
  if (!scores.is_object()) throw ValidationError("field 'scores' must be an object");
  for (const auto& [name, value] : scores.items()) {
    if (value.is_null()) continue;
    r.scores[parse_estimator(name)] = require_number(scores, name);
  }
  return r;
}

HallucinationLabel label_from_json(const Json& j) {
  HallucinationLabel l;
  l.id = require(j, "id").get<std::string>();
  l.is_hallucination = require(j, "is_hallucination").get<bool>();
  l.rouge_f = require_number(j, "rouge_f");
  l.bleu = j.contains("bleu") ? require_number(j, "bleu") : 0.0;
  l.label_threshold = require_number(j, "label_threshold");
  return l;
}

Json to_json(const QARecord& r) {
  Json j{{"id", r.id},
         {"question", r.question},
         {"reference_answer", r.reference_answer},
         {"meta", r.meta}};
  if (r.greedy_answer) j["greedy_answer"] = *r.greedy_answer;
  if (r.samples) j["samples"] = *r.samples;
  return j;
}

Json to_json(const SampleSet& s) {
  Json j{{"id", s.id}, {"greedy_answer", s.greedy_answer}, {"samples", s.samples}};
  if (s.generation_config) j["generation_config"] = to_json(*s.generation_config);
  return j;
}

Json to_json(const AlignmentRecord& a) {
  Json j{{"id", a.id}, {"variant", to_string(a.variant)}};
  if (a.alpha) j["alpha"] = *a.alpha;
  if (a.question_embedding) j["question_embedding"] = *a.question_embedding;
  if (!a.samples.empty()) {
    Json arr = Json::array();
    for (const auto& p : a.samples) {
      if (p.embedding) {
        arr.push_back({{"embedding", *p.embedding}});
      } else if (p.nli) {
        arr.push_back({{"nli", {{"ef", p.nli->ef}, {"cf", p.nli->cf},
                                {"eb", p.nli->eb}, {"cb", p.nli->cb}}}});
      } else if (p.rel) {
        arr.push_back({{"rel", *p.rel}});
      }
    }
    j["samples"] = std::move(arr);
  }
  return j;
}

Json to_json(const UncertaintyResult& r) {
  Json scores = Json::object();
  for (const auto& [e, v] : r.scores) scores[std::string(to_string(e))] = v;
  Json j{{"id", r.id}, {"n", r.n}, {"tau", r.tau},
         {"config_hash", r.config_hash}, {"scores", std::move(scores)}};
  j["label"] = r.label ? Json(*r.label) : Json(nullptr);
  return j;
}

Json to_json(const HallucinationLabel& l) {
  return Json{{"id", l.id},
              {"is_hallucination", l.is_hallucination},
              {"rouge_f", l.rouge_f},
              {"bleu", l.bleu},
              {"label_threshold", l.label_threshold}};
}

JsonlStream<QARecord> load_dataset(const std::filesystem::path& path,
                                   Schema schema) {
  return JsonlStream<QARecord>(
      path, [schema](const Json& j) { return record_from_json(j, schema); });
}

JsonlStream<SampleSet> load_samples(const std::filesystem::path& path) {
  return JsonlStream<SampleSet>(path, sample_set_from_json);
}

JsonlStream<AlignmentRecord> load_alignments(const std::filesystem::path& path) {
  return JsonlStream<AlignmentRecord>(path, alignment_from_json);
}

JsonlStream<UncertaintyResult> load_results(const std::filesystem::path& path) {
  return JsonlStream<UncertaintyResult>(path, result_from_json);
}

JsonlStream<HallucinationLabel> load_labels(const std::filesystem::path& path) {
  return JsonlStream<HallucinationLabel>(path, label_from_json);
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, Mode mode)
    : path_(path),
      out_(path, mode == Mode::kAppend ? std::ios::app : std::ios::trunc) {
  if (!out_) throw ValidationError("cannot write " + path.string());
}

void JsonlWriter::write(const Json& j) {
  out_ << j.dump() << '\n';
  if (!out_) throw ValidationError("write failed for " + path_.string());
}

QARecord attach_samples(QARecord record, const SampleSet& samples) {
  if (record.id != samples.id) {
    throw ValidationError("sample set id '" + samples.id +
                          "' does not match record '" + record.id + "'");
  }
  record.greedy_answer = samples.greedy_answer;
  record.samples = samples.samples;
  return record;
}

PairingDiff pairing_diff(std::span<const QARecord> first,
                         std::span<const QARecord> second) {
  const auto a = sorted_ids(first);
  const auto b = sorted_ids(second);
  PairingDiff d;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(d.only_in_first));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(),
                      std::back_inserter(d.only_in_second));
  std::unordered_map<std::string, const QARecord*> by_id;
  for (const auto& r : second) by_id.emplace(r.id, &r);
  for (const auto& r : first) {
    auto it = by_id.find(r.id);
    if (it != by_id.end() && it->second->reference_answer != r.reference_answer) {
      d.reference_mismatch.push_back(r.id);
    }
  }
  std::sort(d.reference_mismatch.begin(), d.reference_mismatch.end());
  return d;
}

void check_pairing(std::span<const QARecord> first,
                   std::span<const QARecord> second) {
  const PairingDiff d = pairing_diff(first, second);
  if (d.ok()) return;
  auto join = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ",") + id;
    return s;
  };
  std::string msg = "datasets are not paired:";
  if (!d.only_in_first.empty()) msg += " only in first [" + join(d.only_in_first) + "]";
  if (!d.only_in_second.empty()) msg += " only in second [" + join(d.only_in_second) + "]";
  if (!d.reference_mismatch.empty()) {
    msg += " reference answers differ [" + join(d.reference_mismatch) + "]";
  }
  throw ValidationError(msg);
}

std::vector<MergedRow> merge_results(
    std::span<const QARecord> records,
    std::span<const UncertaintyResult> scores,
    const std::function<void(const std::string&)>& warn) {
  auto outcome = join_by_id<QARecord, UncertaintyResult>(records, scores);
  if (warn) {
    for (const auto& id : outcome.unmatched_left) warn("no scores for record '" + id + "'");
    for (const auto& id : outcome.unmatched_right) warn("scores for unknown record '" + id + "'");
  }
  return std::move(outcome.rows);
}

}  // namespace qasnne
