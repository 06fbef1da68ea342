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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runs entirely offline; the sampler check talks to an
// in-process stub endpoint on the loopback interface.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qasnne/alignment.hpp"
#include "qasnne/entropy.hpp"
#include "qasnne/eval.hpp"
#include "qasnne/pipeline.hpp"
#include "qasnne/sampler.hpp"
#include "qasnne/synth.hpp"
#include "qasnne/textsim.hpp"
#include "../support.hpp"

namespace {

using namespace qasnne;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failed;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed += (failed.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

void criterion(const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s) {
    o.check(false, "over time budget of " + fmt(budget_s) + " s");
  }
  failures += !o.pass;
  std::printf("%s  %-34s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
              o.detail.str().c_str());
  if (!o.pass) std::printf("      failed: %s\n", o.failed.c_str());
  std::fflush(stdout);
}

void info(const std::string& name, const std::string& detail) {
  std::printf("INFO  %-34s %s\n", name.c_str(), detail.c_str());
}


Eigen::MatrixXd random_similarity(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s(i, j) = s(j, i) = u(rng);
  return s;
}

// ----------------------------------------------------------------------------

void closed_form_snne() {
  criterion("closed-form SNNE", 1.0, [](Outcome& o) {
    const std::vector<std::string> same(20, "the prograsp forceps is performing grasping");
    std::vector<std::string> distinct;
    for (int i = 0; i < 20; ++i) distinct.push_back("token" + std::to_string(i));
    const double u_same = snne(base_similarity_matrix(same), 1.0);
    const double u_diff = snne(base_similarity_matrix(distinct), 1.0);
    const double want_same = -(1.0 + std::log(19.0));
    const double want_diff = -std::log(19.0);
    o.check(std::abs(u_same - want_same) <= 1e-9, "identical samples");
    o.check(std::abs(u_diff - want_diff) <= 1e-9, "dissimilar samples");

    UncertaintyResult g, h;
    g.id = "grounded";
    g.scores[Estimator::kSnne] = u_same;
    h.id = "hallucinated";
    h.scores[Estimator::kSnne] = u_diff;
    const auto d = detect(std::vector{g, h}, Estimator::kSnne, -3.5);
    o.check(!d[0].predicted_hallucination && d[1].predicted_hallucination, "threshold -3.5");
    o.detail << "identical=" << fmt(u_same, 12) << " dissimilar=" << fmt(u_diff, 12);
  });
}

void gating_identity_and_contraction() {
  criterion("gating identity (w=1)", 0, [](Outcome& o) {
    std::mt19937_64 rng(1001);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
      const Eigen::Index n = 2 + k % 19;
      const auto s = random_similarity(rng, n);
      worst = std::max(worst, std::abs(qa_snne(s, Eigen::VectorXd::Ones(n), 1.0) - snne(s, 1.0)));
    }
    o.check(worst <= 1e-12, "max |QA-SNNE - SNNE| <= 1e-12");
    o.detail << "1000 matrices, max diff " << fmt(worst, 3);
  });

  criterion("gating contraction (softmax w)", 0, [](Outcome& o) {
    std::mt19937_64 rng(1001);  // same matrices as above
    std::mt19937_64 arng(77);
    std::normal_distribution<double> g(0, 1);
    int violations = 0;
    double min_gap = INFINITY;
    for (int k = 0; k < 1000; ++k) {
      const Eigen::Index n = 2 + k % 19;
      const auto s = random_similarity(rng, n);
      Eigen::VectorXd a(n);
      for (auto& x : a) x = g(arng);
      const double gap = qa_snne(s, relevance_weights(a, 10.0), 1.0) - snne(s, 1.0);
      violations += !(gap >= 0.0);
      min_gap = std::min(min_gap, gap);
    }
    o.check(violations == 0, "QA-SNNE >= SNNE everywhere");
    o.detail << violations << " violations, min gap " << fmt(min_gap, 4);
  });
}

void softmax_properties() {
  criterion("softmax properties", 0, [](Outcome& o) {
    std::mt19937_64 rng(2002);
    std::normal_distribution<double> g(0, 3);
    double shift_err = 0, sum_err = 0, uniform_err = 0;
    int monotone_bad = 0;
    for (int k = 0; k < 100; ++k) {
      const Eigen::Index n = 2 + k % 19;
      Eigen::VectorXd a(n);
      for (auto& x : a) x = g(rng);
      const auto w = relevance_weights(a, 10.0);
      const auto ws = relevance_weights((a.array() + 17.25 * g(rng)).matrix(), 10.0);
      shift_err = std::max(shift_err, (w - ws).cwiseAbs().maxCoeff());
      sum_err = std::max(sum_err, std::abs(w.sum() - 1.0));
      const auto w0 = relevance_weights(a, 0.0);
      uniform_err = std::max(uniform_err, (w0.array() - 1.0 / n).abs().maxCoeff());
      double prev = -1;
      for (double beta = 0; beta <= 40; beta += 0.5) {
        const double top = relevance_weights(a, beta).maxCoeff();
        monotone_bad += top < prev;
        prev = top;
      }
    }
    o.check(shift_err <= 1e-12, "shift invariance");
    o.check(uniform_err <= 1e-15, "beta=0 uniform");
    o.check(sum_err <= 1e-9, "sum to 1");
    o.check(monotone_bad == 0, "max weight monotone in beta");
    o.detail << "shift " << fmt(shift_err, 2) << ", sum " << fmt(sum_err, 2)
             << ", 100 vectors x 81 betas";
  });
}

// Every sequence over {a,b,c} of length <= 6, indexed by (length, lexicographic),
// so that a higher index never has a shorter length.
struct SequenceUniverse {
  std::vector<std::vector<std::string>> seqs;
  std::vector<int> length;
  std::vector<std::vector<std::uint64_t>> subseq_bits;  // which indices are subsequences
  std::size_t words = 0;

  SequenceUniverse() {
    const char* sym[] = {"a", "b", "c"};
    std::vector<int> offset(8, 0);
    for (int len = 0, count = 1, off = 0; len <= 6; ++len, count *= 3) {
      offset[len] = off;
      for (int code = 0; code < count; ++code) {
        std::vector<std::string> s(len);
        for (int p = len - 1, c = code; p >= 0; --p, c /= 3) s[p] = sym[c % 3];
        seqs.push_back(s);
        length.push_back(len);
      }
      off += count;
    }
    words = (seqs.size() + 63) / 64;
    auto index_of = [&](const std::vector<int>& digits) {
      int code = 0;
      for (int d : digits) code = code * 3 + d;
      return offset[digits.size()] + code;
    };
    for (const auto& s : seqs) {
      std::vector<std::uint64_t> bits(words, 0);
      const int len = static_cast<int>(s.size());
      for (unsigned mask = 0; mask < (1u << len); ++mask) {
        std::vector<int> digits;
        for (int p = 0; p < len; ++p)
          if (mask & (1u << p)) digits.push_back(s[p][0] - 'a');
        const int idx = index_of(digits);
        bits[idx / 64] |= std::uint64_t{1} << (idx % 64);
      }
      subseq_bits.push_back(std::move(bits));
    }
  }

  // Length of the longest sequence that is a subsequence of both.
  int common(std::size_t i, std::size_t j) const {
    for (std::size_t w = words; w-- > 0;) {
      const std::uint64_t both = subseq_bits[i][w] & subseq_bits[j][w];
      if (both) return length[w * 64 + 63 - static_cast<std::size_t>(__builtin_clzll(both))];
    }
    return 0;
  }
};

void rouge_exhaustive() {
  criterion("ROUGE-L exhaustive oracle", 30.0, [](Outcome& o) {
    const SequenceUniverse u;
    std::vector<TokenSeq> toks;
    for (const auto& s : u.seqs) toks.push_back(TokenSeq{s, 0});
    std::size_t pairs = 0, lcs_bad = 0, f_bad = 0;
    double worst = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      for (std::size_t j = 0; j < toks.size(); ++j) {
        ++pairs;
        const int l = u.common(i, j);
        lcs_bad += lcs_len(toks[i], toks[j]) != static_cast<std::size_t>(l);
        const double m = static_cast<double>(u.length[j]), c = static_cast<double>(u.length[i]);
        double f = 0;
        if (l > 0) {
          const double p = l / c, r = l / m;
          f = 2 * p * r / (p + r);
        }
        const double got = rouge_l(toks[i], toks[j]).f;
        worst = std::max(worst, std::abs(got - f));
        f_bad += std::abs(got - f) > 1e-12;
      }
    }
    o.check(lcs_bad == 0, "LCS length");
    o.check(f_bad == 0, "F-measure");
    o.detail << pairs << " pairs, max |dF| " << fmt(worst, 2);
  });
}

void auroc_oracle() {
  criterion("AUROC oracle + invariance", 0, [](Outcome& o) {
    std::mt19937_64 rng(3003);
    double worst = 0, worst_tf = 0;
    for (int k = 0; k < 500; ++k) {
      const std::size_t n = 2 + rng() % 49;
      std::vector<bool> y(n);
      std::vector<double> s(n);
      const int levels = 1 + static_cast<int>(rng() % 10);  // few levels -> ties
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng() % 2;
        s[i] = static_cast<double>(rng() % levels) / 3.0 - 1.0;
      }
      // both classes must be present
      y[0] = true;
      y[1] = false;

      double wins = 0, total = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (y[i] && !y[j]) {
            total += 1;
            wins += s[i] > s[j] ? 1 : s[i] == s[j] ? 0.5 : 0;
          }
      const double a = auroc(y, s);
      worst = std::max(worst, std::abs(a - wins / total));
      std::vector<double> e(n), aff(n);
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(s[i]);
        aff[i] = 2.5 * s[i] - 7.0;
      }
      worst_tf = std::max({worst_tf, std::abs(auroc(y, e) - a), std::abs(auroc(y, aff) - a)});
    }
    o.check(worst <= 1e-12, "rank vs pair counting");
    o.check(worst_tf <= 1e-12, "exp / affine invariance");
    o.detail << "500 sets, max diff " << fmt(worst, 2) << ", transforms " << fmt(worst_tf, 2);
  });
}

void dse_closed_forms() {
  criterion("DSE closed forms", 0, [](Outcome& o) {
    SemanticClustering one;
    one.assignments.assign(20, 0);
    o.check(dse(one) == 0.0, "single cluster");
    double worst = 0;
    for (int k = 1; k <= 20; ++k) {
      SemanticClustering c;
      for (int rep = 0; rep < 2; ++rep)
        for (int i = 0; i < k; ++i) c.assignments.push_back(i);
      worst = std::max(worst, std::abs(dse(c) - std::log(static_cast<double>(k))));
    }
    o.check(worst <= 1e-12, "k equal clusters = ln k");
    std::mt19937_64 rng(4004);
    double perm = 0;
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<int> sizes(1 + rng() % 6);
      for (auto& s : sizes) s = 1 + static_cast<int>(rng() % 5);
      SemanticClustering a, b;
      for (std::size_t c = 0; c < sizes.size(); ++c) a.assignments.insert(a.assignments.end(), sizes[c], static_cast<int>(c));
      std::shuffle(sizes.begin(), sizes.end(), rng);
      for (std::size_t c = 0; c < sizes.size(); ++c) b.assignments.insert(b.assignments.end(), sizes[c], static_cast<int>(c));
      perm = std::max(perm, std::abs(dse(a) - dse(b)));
    }
    o.check(perm <= 1e-12, "depends only on sizes");
    o.detail << "ln k max err " << fmt(worst, 2) << ", permutation max diff " << fmt(perm, 2);
  });
}

struct SyntheticRun {
  EvalReport report;
  std::vector<HallucinationLabel> labels;
  std::vector<UncertaintyResult> results;
};

SyntheticRun run_synthetic(const testing::TempDir& dir, WeightScale scale, const std::string& tag) {
  RunConfig c;  // defaults: seed-fixed 100 + 100 records, n = 20
  c.scoring.alignment.weight_scale = scale;
  const auto data = dir / ("synth-" + tag);
  run_synth(c, data);
  c.backend.alignment_files = {{Variant::kEmb, (data / "alignment_emb.jsonl").string()},
                               {Variant::kEnt, (data / "alignment_ent.jsonl").string()},
                               {Variant::kCrossE, (data / "alignment_crosse.jsonl").string()}};
  run_label(c, data / "dataset.jsonl", data / "samples.jsonl", data / "labels.jsonl");
  run_score(c, data / "dataset.jsonl", data / "samples.jsonl", data / "results.jsonl");
  run_evaluate(c, data / "labels.jsonl", data / "results.jsonl", data / "manifest.json",
               data / "report");
  SyntheticRun run;
  run.report = report_from_json(Json::parse(testing::slurp(data / "report" / "report.json")));
  run.labels = read_all(load_labels(data / "labels.jsonl"));
  run.results = read_all(load_results(data / "results.jsonl"));
  return run;
}

void synthetic_end_to_end(const testing::TempDir& dir, SyntheticRun& out) {
  criterion("synthetic end-to-end", 60.0, [&](Outcome& o) {
    out = run_synthetic(dir, WeightScale::kSoftmax, "literal");
    const EvalReport& r = out.report;
    o.check(r.records == 200 && r.positives == 100, "200 records, 50% hallucinated");
    for (Estimator e : {Estimator::kSnne, Estimator::kQaSnneEmb, Estimator::kQaSnneEnt,
                        Estimator::kQaSnneCrossE}) {
      const auto& m = r.estimators.at(e);
      const std::string name(to_string(e));
      o.check(m.auroc && *m.auroc >= 0.95, name + " AUROC >= 0.95");
      o.check(m.accuracy && *m.accuracy >= 0.90, name + " accuracy >= 0.90");
      o.detail << name << " auroc=" << fmt(m.auroc.value_or(NAN), 4)
               << " acc=" << fmt(m.accuracy.value_or(NAN), 4) << ", ";
    }
    const auto& d = r.estimators.at(Estimator::kDse);
    o.check(d.auroc && *d.auroc >= 0.90, "dse AUROC >= 0.90");
    o.detail << "dse auroc=" << fmt(d.auroc.value_or(NAN), 4);
  });
}

void prc_sanity(const SyntheticRun& run) {
  criterion("PRC sanity (SNNE)", 0, [&](Outcome& o) {
    const auto it = run.report.estimators.find(Estimator::kSnne);
    o.check(it != run.report.estimators.end() && !it->second.prc.empty(), "curve present");
    if (!o.pass) return;
    const auto& curve = it->second.prc;
    double worst_drop = 0;
    for (std::size_t k = 1; k < curve.size(); ++k) {
      worst_drop = std::max(worst_drop, curve[k - 1].mean_rouge_l - curve[k].mean_rouge_l);
    }
    o.check(worst_drop <= 0.01, "non-decreasing within 0.01 per step");
    double sum = 0;
    for (const auto& l : run.labels) sum += l.rouge_f;
    const double global = sum / static_cast<double>(run.labels.size());
    o.check(curve.front().rejection_fraction == 0.0 && curve.front().mean_rouge_l == global,
            "r=0 equals global mean exactly");
    o.detail << "largest step drop " << fmt(worst_drop, 3) << ", r=0 " << fmt(curve.front().mean_rouge_l, 17)
             << " vs mean " << fmt(global, 17);
  });
}

void published_deltas(const testing::TempDir& dir) {
  criterion("split comparison deltas", 0, [&](Outcome& o) {
    auto report = [](const std::string& name, double bleu, double auroc_value) {
      EvalReport r;
      r.dataset.name = name;
      r.mean_bleu = bleu;
      r.mean_rouge_l = 0.5;
      r.records = 1;
      r.estimators[Estimator::kQaSnneEmb].auroc = auroc_value;
      return r;
    };
    EvalReport in = report("in-template", 0.620, 0.798);
    EvalReport out = report("out-of-template", 0.373, 0.816);
    out.dataset.paired_with = "in-template";
    const auto cmp = dir / "compare";
    std::filesystem::create_directories(cmp);
    std::ofstream(cmp / "in.json") << to_json(in).dump(2);
    std::ofstream(cmp / "out.json") << to_json(out).dump(2);
    run_compare(cmp / "in.json", cmp / "out.json", 0.05, cmp);
    const Json d = Json::parse(testing::slurp(cmp / "compare.json"));
    double bleu = NAN, au = NAN;
    for (const auto& m : d["deltas"]) {
      if (m["metric"] == "bleu") bleu = m["delta"].get<double>();
      if (m["metric"] == "auroc.qa_snne_emb") au = m["delta"].get<double>();
    }
    o.check(bleu == -0.247, "BLEU 0.620 -> 0.373 gives -0.247");
    o.check(au == 0.018, "AUROC 0.798 -> 0.816 gives +0.018");
    o.detail << "bleu " << fmt(bleu, 17) << ", auroc " << fmt(au, 17);
  });
}

void sampler_contract(const testing::TempDir& dir) {
  criterion("sampler contract", 0, [&](Outcome& o) {
    testing::StubServer stub;
    std::atomic<int> requests{0};
    std::atomic<int> injected{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req,
                                                   httplib::Response& res) {
      ++requests;
      const Json body = Json::parse(req.body);
      const std::string q = body["messages"][1]["content"].get<std::string>();
      if (q == "question 3" && injected < 2) {
        ++injected;
        res.status = 500;
        return;
      }
      Json choices = Json::array();
      for (int k = 0; k < body["n"].get<int>(); ++k) {
        choices.push_back({{"message", {{"content", "reply " + std::to_string(k)}}}});
      }
      res.set_content(Json{{"choices", choices}}.dump(), "application/json");
    });
    stub.start();

    const auto data = dir / "sampler";
    std::filesystem::create_directories(data);
    {
      std::ofstream ds(data / "dataset.jsonl");
      for (int i = 0; i < 10; ++i) {
        ds << Json{{"id", "r" + std::to_string(i)}, {"question", "question " + std::to_string(i)},
                   {"reference_answer", "ref"}}.dump() << "\n";
      }
    }
    SamplingJob job;
    job.dataset_path = data / "dataset.jsonl";
    job.output_path = data / "samples.jsonl";
    job.generation.endpoint_url = stub.url("/v1/chat/completions");
    job.generation.n_samples = 20;
    job.retry.backoff_base = std::chrono::milliseconds(5);
    const auto first = run_sampling(job);
    const auto rows = read_all(load_samples(job.output_path));
    std::size_t generations = 0;
    for (const auto& r : rows) generations += 1 + r.samples.size();
    o.check(rows.size() == 10 && generations == 10 * (1 + 20), "10 x (1 + 20) generations");
    o.check(first.records_failed == 0 && injected == 2, "survives injected 500s");
    const int before = requests;
    const auto second = run_sampling(job);
    o.check(requests == before && second.requests_sent == 0, "rerun issues zero requests");
    o.detail << generations << " generations, " << injected << " injected 500s, rerun sent "
             << (requests - before);
  });
}

void informational_rescaled(const testing::TempDir& dir) {
  try {
    const SyntheticRun run = run_synthetic(dir, WeightScale::kSoftmaxTimesN, "times-n");
    std::ostringstream os;
    os << "weight_scale=softmax_times_n (opt-in, not a criterion):";
    for (Estimator e : {Estimator::kQaSnneEmb, Estimator::kQaSnneEnt, Estimator::kQaSnneCrossE}) {
      const auto& m = run.report.estimators.at(e);
      os << " " << to_string(e) << " auroc=" << fmt(m.auroc.value_or(NAN), 4)
         << " acc=" << fmt(m.accuracy.value_or(NAN), 4);
    }
    info("rescaled QA weights", os.str());
  } catch (const std::exception& e) {
    info("rescaled QA weights", std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  testing::TempDir dir;
  closed_form_snne();
  gating_identity_and_contraction();
  softmax_properties();
  rouge_exhaustive();
  auroc_oracle();
  dse_closed_forms();
  SyntheticRun synthetic;
  synthetic_end_to_end(dir, synthetic);
  prc_sanity(synthetic);
  published_deltas(dir);
  sampler_contract(dir);
  informational_rescaled(dir);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
