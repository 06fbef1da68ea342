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

#include "qasnne/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace qasnne {
namespace {

Json number_or_null(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

std::optional<double> optional_number(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

double quantize(double x) { return std::round(x * 1e9) / 1e9; }

std::string fmt(const std::optional<double>& v, int precision = 4) {
  if (!v || !std::isfinite(*v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

}  // namespace

HallucinationLabel label_record(const QARecord& record, double label_threshold,
                                TokenizerMode mode) {
  if (!record.greedy_answer) {
    throw ValidationError("record '" + record.id + "' has no greedy answer to label");
  }
  const TokenSeq greedy = tokenize(*record.greedy_answer, mode);
  const TokenSeq reference = tokenize(record.reference_answer, mode);
  HallucinationLabel l;
  l.id = record.id;
  l.rouge_f = rouge_l(greedy, reference).f;
  l.bleu = bleu(greedy, reference);
  l.label_threshold = label_threshold;
  l.is_hallucination = l.rouge_f < label_threshold;
  return l;
}

std::vector<HallucinationLabel> label_hallucinations(std::span<const QARecord> records,
                                                     double label_threshold,
                                                     TokenizerMode mode) {
  std::vector<HallucinationLabel> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(label_record(r, label_threshold, mode));
  return out;
}

std::vector<DetectionOutcome> detect(std::span<const UncertaintyResult> results,
                                     Estimator estimator, double theta_star,
                                     bool allow_dse) {
  if (estimator == Estimator::kDse && !allow_dse) {
    throw ValidationError(
        "DSE is not thresholded by default (its scale is unrelated to theta*); "
        "pass the DSE override to force it");
  }
  std::vector<DetectionOutcome> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    const auto s = r.score(estimator);
    if (!s) {
      throw ValidationError("estimator " + std::string(to_string(estimator)) +
                            " absent for record '" + r.id + "'");
    }
    out.push_back({r.id, *s >= theta_star, *s, theta_star});
  }
  return out;
}

double auroc(const std::vector<bool>& is_positive, std::span<const double> scores) {
  if (is_positive.size() != scores.size()) {
    throw ValidationError("auroc: labels and scores differ in length");
  }
  const std::size_t n = scores.size();
  const auto positives = static_cast<std::size_t>(
      std::count(is_positive.begin(), is_positive.end(), true));
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("undefined AUROC: need both hallucinated and grounded records");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("auroc: non-finite score");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of positive mid-ranks (1-based).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (is_positive[order[k]]) rank_sum += mid;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

ConfusionMatrix confusion(std::span<const DetectionOutcome> outcomes,
                          std::span<const HallucinationLabel> labels) {
  if (outcomes.size() != labels.size()) {
    throw ValidationError("accuracy: " + std::to_string(outcomes.size()) +
                          " predictions for " + std::to_string(labels.size()) + " labels");
  }
  std::unordered_map<std::string, bool> truth;
  for (const auto& l : labels) {
    if (!truth.emplace(l.id, l.is_hallucination).second) {
      throw ValidationError("duplicate label id '" + l.id + "'");
    }
  }
  ConfusionMatrix m;
  for (const auto& o : outcomes) {
    auto it = truth.find(o.id);
    if (it == truth.end()) {
      throw ValidationError("accuracy: no label for '" + o.id + "'");
    }
    if (o.predicted_hallucination) {
      ++(it->second ? m.tp : m.fp);
    } else {
      ++(it->second ? m.fn : m.tn);
    }
  }
  return m;
}

double accuracy(std::span<const DetectionOutcome> outcomes,
                std::span<const HallucinationLabel> labels) {
  const ConfusionMatrix m = confusion(outcomes, labels);
  if (m.total() == 0) throw ValidationError("accuracy of an empty set");
  return static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
}

std::vector<double> default_rejection_fractions() {
  std::vector<double> f;
  for (int k = 0; k < 20; ++k) f.push_back(k / 20.0);
  return f;
}

std::size_t rejected_count(double r, std::size_t n) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ValidationError("rejection fraction must lie in [0, 1]");
  }
  const double x = r * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, static_cast<double>(n))) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(x));
}

std::vector<PrcPoint> prc(std::span<const double> uncertainty,
                          std::span<const double> utility,
                          std::span<const double> fractions) {
  if (uncertainty.size() != utility.size()) {
    throw ValidationError("prc: uncertainty and utility differ in length");
  }
  const std::size_t n = uncertainty.size();
  if (n == 0) throw ValidationError("prc: no records");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return uncertainty[a] > uncertainty[b];
  });
  std::vector<PrcPoint> out;
  out.reserve(fractions.size());
  std::vector<bool> rejected(n);
  for (double r : fractions) {
    if (!(r >= 0.0 && r < 1.0)) {
      throw ValidationError("prc: rejection fraction must lie in [0, 1)");
    }
    const std::size_t k = rejected_count(r, n);
    std::fill(rejected.begin(), rejected.end(), false);
    for (std::size_t i = 0; i < k; ++i) rejected[order[i]] = true;
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (rejected[i]) continue;
      sum += utility[i];
      ++kept;
    }
    out.push_back({r, kept,
                   kept ? sum / static_cast<double>(kept)
                        : std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

EvalReport build_report(std::span<const HallucinationLabel> labels,
                        std::span<const UncertaintyResult> results,
                        const EvalOptions& options, DatasetInfo dataset) {
  auto joined = join_by_id<HallucinationLabel, UncertaintyResult>(labels, results, "results");
  EvalReport report;
  report.dataset = std::move(dataset);
  report.unmatched_labels = joined.unmatched_left;
  report.unmatched_results = joined.unmatched_right;
  report.records = joined.rows.size();

  std::vector<HallucinationLabel> row_labels;
  std::vector<UncertaintyResult> row_results;
  std::vector<bool> positive;
  std::vector<double> utility;
  double bleu_sum = 0.0;
  for (const auto& row : joined.rows) {
    row_labels.push_back(row.left);
    row_results.push_back(row.right);
    positive.push_back(row.left.is_hallucination);
    utility.push_back(row.left.rouge_f);
    bleu_sum += row.left.bleu;
    ++(row.left.is_hallucination ? report.positives : report.negatives);
  }
  const double count = static_cast<double>(report.records);
  report.mean_bleu = bleu_sum / count;
  report.mean_rouge_l = std::accumulate(utility.begin(), utility.end(), 0.0) / count;

  std::vector<Estimator> estimators = options.estimators;
  if (estimators.empty()) {
    for (Estimator e : kAllEstimators) {
      if (row_results.front().score(e)) estimators.push_back(e);
    }
  }
  for (Estimator e : estimators) {
    std::vector<double> scores;
    scores.reserve(row_results.size());
    for (const auto& r : row_results) {
      const auto s = r.score(e);
      if (!s) {
        throw ValidationError("estimator " + std::string(to_string(e)) +
                              " absent for record '" + r.id + "'");
      }
      scores.push_back(*s);
    }
    EstimatorMetrics m;
    m.auroc = auroc(positive, scores);
    if (e != Estimator::kDse || options.allow_dse_detection) {
      const auto outcomes = detect(row_results, e, options.theta_star,
                                   options.allow_dse_detection);
      m.accuracy = accuracy(outcomes, row_labels);
    }
    m.prc = prc(scores, utility, options.fractions);
    report.estimators.emplace(e, std::move(m));
  }
  return report;
}

Json to_json(const EvalReport& report) {
  Json estimators = Json::object();
  for (const auto& [e, m] : report.estimators) {
    Json curve = Json::array();
    for (const auto& p : m.prc) {
      curve.push_back({{"rejection_fraction", p.rejection_fraction},
                       {"retained_count", p.retained_count},
                       {"mean_rouge_l", number_or_null(p.mean_rouge_l)}});
    }
    estimators[std::string(to_string(e))] = {{"auroc", number_or_null(m.auroc)},
                                             {"accuracy", number_or_null(m.accuracy)},
                                             {"prc", std::move(curve)}};
  }
  Json dataset{{"name", report.dataset.name}, {"id_digest", report.dataset.id_digest}};
  dataset["split"] = report.dataset.split ? Json(to_string(*report.dataset.split)) : Json(nullptr);
  dataset["paired_with"] =
      report.dataset.paired_with ? Json(*report.dataset.paired_with) : Json(nullptr);
  return Json{{"dataset", std::move(dataset)},
              {"counts", {{"records", report.records},
                          {"positives", report.positives},
                          {"negatives", report.negatives}}},
              {"utility", {{"bleu", report.mean_bleu},
                           {"rouge_l", report.mean_rouge_l},
                           {"aggregation", "mean_of_sentence_scores"}}},
              {"estimators", std::move(estimators)},
              {"unmatched", {{"labels", report.unmatched_labels},
                             {"results", report.unmatched_results}}},
              {"config_hash", report.config_hash},
              {"provenance", report.provenance}};
}

EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    const Json& ds = j.at("dataset");
    r.dataset.name = ds.at("name").get<std::string>();
    r.dataset.id_digest = ds.value("id_digest", std::string{});
    if (ds.contains("split") && !ds["split"].is_null()) {
      r.dataset.split = parse_split(ds["split"].get<std::string>());
    }
    if (ds.contains("paired_with") && !ds["paired_with"].is_null()) {
      r.dataset.paired_with = ds["paired_with"].get<std::string>();
    }
    if (auto it = j.find("counts"); it != j.end()) {
      r.records = it->value("records", std::size_t{0});
      r.positives = it->value("positives", std::size_t{0});
      r.negatives = it->value("negatives", std::size_t{0});
    }
    const Json& util = j.at("utility");
    r.mean_bleu = util.at("bleu").get<double>();
    r.mean_rouge_l = util.at("rouge_l").get<double>();
    if (auto it = j.find("estimators"); it != j.end()) {
      for (const auto& [name, m] : it->items()) {
        EstimatorMetrics em;
        em.auroc = optional_number(m, "auroc");
        em.accuracy = optional_number(m, "accuracy");
        if (auto p = m.find("prc"); p != m.end()) {
          for (const auto& pt : *p) {
            em.prc.push_back({pt.at("rejection_fraction").get<double>(),
                              pt.at("retained_count").get<std::size_t>(),
                              optional_number(pt, "mean_rouge_l")
                                  .value_or(std::numeric_limits<double>::quiet_NaN())});
          }
        }
        r.estimators.emplace(parse_estimator(name), std::move(em));
      }
    }
    r.config_hash = j.value("config_hash", std::string{});
    if (j.contains("provenance")) r.provenance = j["provenance"];
    if (auto u = j.find("unmatched"); u != j.end() && u->is_object()) {
      r.unmatched_labels = u->value("labels", std::vector<std::string>{});
      r.unmatched_results = u->value("results", std::vector<std::string>{});
    }
    return r;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::string to_text(const EvalReport& report) {
  std::ostringstream os;
  os << "dataset      " << report.dataset.name;
  if (report.dataset.split) os << " (" << to_string(*report.dataset.split) << ")";
  os << "\nrecords      " << report.records << "  positives " << report.positives
     << "  negatives " << report.negatives << "\n";
  os << "utility      BLEU " << fmt(report.mean_bleu) << "  ROUGE-L "
     << fmt(report.mean_rouge_l) << "  (mean of sentence scores)\n";
  os << "config_hash  " << report.config_hash << "\n\n";
  os << std::left << std::setw(16) << "estimator" << std::right << std::setw(10)
     << "AUROC" << std::setw(10) << "accuracy" << std::setw(12) << "PRC@0.00"
     << std::setw(12) << "PRC@0.50" << "\n";
  for (const auto& [e, m] : report.estimators) {
    auto at = [&](double r) -> std::optional<double> {
      for (const auto& p : m.prc) {
        if (std::abs(p.rejection_fraction - r) < 1e-12) return p.mean_rouge_l;
      }
      return std::nullopt;
    };
    os << std::left << std::setw(16) << to_string(e) << std::right << std::setw(10)
       << fmt(m.auroc) << std::setw(10) << fmt(m.accuracy) << std::setw(12)
       << fmt(at(0.0)) << std::setw(12) << fmt(at(0.5)) << "\n";
  }
  if (!report.unmatched_labels.empty() || !report.unmatched_results.empty()) {
    os << "\nunmatched    labels " << report.unmatched_labels.size() << "  results "
       << report.unmatched_results.size() << "\n";
  }
  return os.str();
}

std::string prc_csv(std::span<const PrcPoint> curve) {
  std::ostringstream os;
  os << "rejection_fraction,retained_count,mean_rouge_l\n";
  // Shortest representation that round-trips, so 0.05 prints as 0.05.
  auto shortest = [](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  };
  for (const auto& p : curve) {
    os << shortest(p.rejection_fraction) << ',' << p.retained_count << ',';
    if (std::isfinite(p.mean_rouge_l)) os << shortest(p.mean_rouge_l);
    os << '\n';
  }
  return os.str();
}

DeltaReport compare_splits(const EvalReport& in, const EvalReport& out,
                           double alert_margin) {
  const bool linked = (in.dataset.paired_with && *in.dataset.paired_with == out.dataset.name) ||
                      (out.dataset.paired_with && *out.dataset.paired_with == in.dataset.name);
  if (!linked) {
    throw ValidationError("unpaired datasets: '" + in.dataset.name + "' and '" +
                          out.dataset.name + "' do not name each other as paired_with");
  }
  if (!in.dataset.id_digest.empty() && !out.dataset.id_digest.empty() &&
      in.dataset.id_digest != out.dataset.id_digest) {
    throw ValidationError("unpaired datasets: id sets differ (digest mismatch)");
  }
  DeltaReport d;
  d.in_name = in.dataset.name;
  d.out_name = out.dataset.name;
  d.alert_margin = alert_margin;
  auto add = [&](std::string metric, double a, double b) {
    const double delta = quantize(b - a);
    d.deltas.push_back({std::move(metric), a, b, delta, delta < -alert_margin});
  };
  add("bleu", in.mean_bleu, out.mean_bleu);
  add("rouge_l", in.mean_rouge_l, out.mean_rouge_l);
  for (const auto& [e, m_in] : in.estimators) {
    auto it = out.estimators.find(e);
    if (it == out.estimators.end()) continue;
    const std::string name(to_string(e));
    if (m_in.auroc && it->second.auroc) add("auroc." + name, *m_in.auroc, *it->second.auroc);
    if (m_in.accuracy && it->second.accuracy) {
      add("accuracy." + name, *m_in.accuracy, *it->second.accuracy);
    }
  }
  return d;
}

Json to_json(const DeltaReport& d) {
  Json rows = Json::array();
  for (const auto& m : d.deltas) {
    rows.push_back({{"metric", m.metric}, {"in", m.in}, {"out", m.out},
                    {"delta", m.delta}, {"alert", m.alert}});
  }
  return Json{{"in", d.in_name}, {"out", d.out_name},
              {"alert_margin", d.alert_margin}, {"deltas", std::move(rows)}};
}

std::string to_text(const DeltaReport& d) {
  std::ostringstream os;
  os << "in  " << d.in_name << "\nout " << d.out_name << "\n\n";
  os << std::left << std::setw(24) << "metric" << std::right << std::setw(10) << "in"
     << std::setw(10) << "out" << std::setw(10) << "delta" << "\n";
  for (const auto& m : d.deltas) {
    os << std::left << std::setw(24) << m.metric << std::right << std::setw(10)
       << fmt(m.in, 3) << std::setw(10) << fmt(m.out, 3) << std::setw(10)
       << (m.delta >= 0 ? "+" : "") + fmt(m.delta, 3)
       << (m.alert ? "  DEGRADED" : "") << "\n";
  }
  return os.str();
}

}  // namespace qasnne
