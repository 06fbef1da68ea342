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
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "qasnne/errors.hpp"
#include "qasnne/types.hpp"

namespace qasnne {

using Json = nlohmann::json;

enum class Split { kInTemplate, kOutOfTemplate, kExternal };

std::string_view to_string(Split s);
Split parse_split(std::string_view name);

// Generation settings for the greedy answer and the sampled answers.
struct GenerationConfig {
  double greedy_temperature = 0.1;
  double sample_temperature = 1.0;
  int n_samples = 20;
  int top_k = 50;
  double top_p = 0.9;
  std::string prompt_template =
      "You are assisting during a minimally invasive surgical procedure. "
      "Answer the question about the current endoscopic frame concisely.";
  std::string model_name;
  std::string endpoint_url;

  void validate() const;
  friend bool operator==(const GenerationConfig&,
                         const GenerationConfig&) = default;
};

Json to_json(const GenerationConfig& c);
GenerationConfig generation_config_from_json(const Json& j);

// One question instance. greedy_answer and samples are populated once the
// sampling stage has run.
struct QARecord {
  std::string id;
  std::string question;
  std::string reference_answer;
  std::optional<std::string> greedy_answer;
  std::optional<std::vector<std::string>> samples;
  Json meta = Json::object();

  std::size_t n() const { return samples ? samples->size() : 0; }
  friend bool operator==(const QARecord&, const QARecord&) = default;
};

// The stage-ii output for one record.
struct SampleSet {
  std::string id;
  std::string greedy_answer;
  std::vector<std::string> samples;
  std::optional<GenerationConfig> generation_config;
  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

struct DatasetManifest {
  std::string name;
  Split split = Split::kInTemplate;
  std::size_t record_count = 0;
  std::optional<std::string> paired_with;
  std::optional<GenerationConfig> generation_config;
};

Json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct RawNli {
  double ef = 0, cf = 0, eb = 0, cb = 0;
  friend bool operator==(const RawNli&, const RawNli&) = default;
};

// Per-sample alignment input. Exactly one field is set, matching the
// record's variant.
struct AlignmentPayload {
  std::optional<std::vector<double>> embedding;
  std::optional<RawNli> nli;
  std::optional<double> rel;
  friend bool operator==(const AlignmentPayload&,
                         const AlignmentPayload&) = default;
};

// One line of an alignment file. Either carries raw scorer outputs
// (samples[] plus question_embedding for Emb), precomputed alpha[], or both.
struct AlignmentRecord {
  std::string id;
  Variant variant = Variant::kEmb;
  std::optional<std::vector<double>> alpha;
  std::optional<std::vector<double>> question_embedding;
  std::vector<AlignmentPayload> samples;

  std::size_t n() const { return alpha ? alpha->size() : samples.size(); }
  friend bool operator==(const AlignmentRecord&,
                         const AlignmentRecord&) = default;
};

// Per-record scores for each estimator that was run.
struct UncertaintyResult {
  std::string id;
  std::map<Estimator, double> scores;
  double tau = 1.0;
  int n = 0;
  std::string config_hash;
  std::optional<bool> label;

  std::optional<double> score(Estimator e) const {
    auto it = scores.find(e);
    if (it == scores.end()) return std::nullopt;
    return it->second;
  }
  friend bool operator==(const UncertaintyResult&,
                         const UncertaintyResult&) = default;
};

struct HallucinationLabel {
  std::string id;
  bool is_hallucination = false;
  double rouge_f = 0.0;
  double bleu = 0.0;
  double label_threshold = 0.5;
  friend bool operator==(const HallucinationLabel&,
                         const HallucinationLabel&) = default;
};

enum class Schema {
  kDataset,  // samples optional
  kSampled,  // greedy_answer and samples required
};

// Field-level validators. Each throws ValidationError naming the field.
QARecord record_from_json(const Json& j, Schema schema);
SampleSet sample_set_from_json(const Json& j);
AlignmentRecord alignment_from_json(const Json& j);
UncertaintyResult result_from_json(const Json& j);
HallucinationLabel label_from_json(const Json& j);

Json to_json(const QARecord& r);
Json to_json(const SampleSet& s);
Json to_json(const AlignmentRecord& a);
Json to_json(const UncertaintyResult& r);
Json to_json(const HallucinationLabel& l);

// Streaming JSONL reader. Holds one parsed line at a time; only the set of
// seen ids grows with file length.
template <typename T>
class JsonlStream {
 public:
  using Parser = std::function<T(const Json&)>;

  JsonlStream(std::filesystem::path path, Parser parse)
      : path_(std::move(path)), in_(path_), parse_(std::move(parse)) {
    if (!in_) {
      throw ValidationError("cannot open " + path_.string());
    }
  }

  std::optional<T> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        fail("malformed JSON: " + std::string(e.what()));
      }
      if (!j.is_object()) fail("line is not a JSON object");
      T value;
      try {
        value = parse_(j);
      } catch (const ValidationError& e) {
        fail(e.what());
      } catch (const Json::exception& e) {
        fail(std::string("wrong field type: ") + e.what());
      }
      if (!seen_.insert(value.id).second) {
        fail("duplicate id '" + value.id + "'");
      }
      return value;
    }
    return std::nullopt;
  }

  std::size_t line_number() const { return line_no_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(path_.string() + ":" + std::to_string(line_no_) +
                          ": " + what);
  }

  std::filesystem::path path_;
  std::ifstream in_;
  Parser parse_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_;
};

JsonlStream<QARecord> load_dataset(const std::filesystem::path& path,
                                   Schema schema = Schema::kDataset);
JsonlStream<SampleSet> load_samples(const std::filesystem::path& path);
JsonlStream<AlignmentRecord> load_alignments(const std::filesystem::path& path);
JsonlStream<UncertaintyResult> load_results(const std::filesystem::path& path);
JsonlStream<HallucinationLabel> load_labels(const std::filesystem::path& path);

template <typename T>
std::vector<T> read_all(JsonlStream<T>&& stream) {
  std::vector<T> out;
  while (auto v = stream.next()) out.push_back(std::move(*v));
  return out;
}

class JsonlWriter {
 public:
  enum class Mode { kTruncate, kAppend };
  explicit JsonlWriter(const std::filesystem::path& path,
                       Mode mode = Mode::kTruncate);
  void write(const Json& j);
  void flush() { out_.flush(); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

template <typename T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> rows) {
  JsonlWriter w(path);
  for (const auto& r : rows) w.write(to_json(r));
}

// Combines a dataset record with its sampled answers. Ids must match.
QARecord attach_samples(QARecord record, const SampleSet& samples);

// Symmetric difference of ids plus per-id reference-answer disagreements.
struct PairingDiff {
  std::vector<std::string> only_in_first;
  std::vector<std::string> only_in_second;
  std::vector<std::string> reference_mismatch;
  bool ok() const {
    return only_in_first.empty() && only_in_second.empty() &&
           reference_mismatch.empty();
  }
};

PairingDiff pairing_diff(std::span<const QARecord> first,
                         std::span<const QARecord> second);
// Throws ValidationError listing every offending id.
void check_pairing(std::span<const QARecord> first,
                   std::span<const QARecord> second);

template <typename L, typename R>
struct JoinedRow {
  L left;
  R right;
};

template <typename L, typename R>
struct JoinOutcome {
  std::vector<JoinedRow<L, R>> rows;
  std::vector<std::string> unmatched_left;
  std::vector<std::string> unmatched_right;
};

// Inner join on `id`, in left order. Unmatched ids on both sides are
// reported. Duplicate right-hand ids and empty joins throw.
template <typename L, typename R>
JoinOutcome<L, R> join_by_id(std::span<const L> left, std::span<const R> right,
                             std::string_view right_name = "scores") {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < right.size(); ++i) {
    if (!index.emplace(right[i].id, i).second) {
      throw ValidationError("duplicate id '" + right[i].id + "' in " +
                            std::string(right_name));
    }
  }
  JoinOutcome<L, R> out;
  std::vector<bool> used(right.size(), false);
  for (const auto& l : left) {
    auto it = index.find(l.id);
    if (it == index.end()) {
      out.unmatched_left.push_back(l.id);
      continue;
    }
    used[it->second] = true;
    out.rows.push_back({l, right[it->second]});
  }
  for (std::size_t i = 0; i < right.size(); ++i) {
    if (!used[i]) out.unmatched_right.push_back(right[i].id);
  }
  if (out.rows.empty()) {
    throw ValidationError("zero joined rows against " +
                          std::string(right_name));
  }
  return out;
}

using MergedRow = JoinedRow<QARecord, UncertaintyResult>;

// join_by_id specialised to records x scores; unmatched ids go to `warn`.
std::vector<MergedRow> merge_results(
    std::span<const QARecord> records,
    std::span<const UncertaintyResult> scores,
    const std::function<void(const std::string&)>& warn = {});

}  // namespace qasnne
