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

#include "qasnne/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "qasnne/textsim.hpp"

namespace qasnne {
namespace {

constexpr std::array<const char*, 8> kTools = {
    "bipolar forceps", "prograsp forceps", "large needle driver",
    "monopolar curved scissors", "ultrasound probe", "suction instrument",
    "clip applier", "vessel sealer"};
constexpr std::array<const char*, 10> kStates = {
    "grasping", "retraction", "tissue manipulation", "cutting", "cauterization",
    "suturing", "clipping", "idle", "looping", "staple"};
constexpr std::array<const char*, 6> kLocations = {
    "left-top", "right-top", "left-bottom", "right-bottom", "top-center", "bottom-center"};
// Words that never occur in a reference answer.
constexpr std::array<const char*, 48> kLexicon = {
    "gallbladder", "stapler", "irrigation", "spleen", "mesh", "drain", "lens",
    "fog", "smoke", "bleeding", "liver", "port", "trocar", "gauze", "hook",
    "catheter", "needle", "thread", "camera", "retractor", "sponge", "artery",
    "vein", "fat", "fascia", "ureter", "bowel", "omentum", "peritoneum", "clot",
    "suture", "knot", "balloon", "sheath", "scope", "light", "glare", "blur",
    "specimen", "bag", "pouch", "pressure", "insufflation", "valve", "lumen",
    "wire", "plate", "tube"};
constexpr std::array<const char*, 6> kOffTopic = {
    "the camera lens is fogged", "smoke obscures the view",
    "irrigation fluid pools below", "the port site looks intact",
    "gauze rests near the edge", "light glare hides detail"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }
  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  template <typename Array>
  const char* pick(const Array& a) { return a[index(a.size())]; }

 private:
  std::mt19937_64 engine_;
};

struct Question {
  std::string text;
  std::string reference;
  std::string short_form;   // reference without leading article
  std::string inverted;     // answer-first phrasing
  std::string verbose;      // one extra token
  std::string wrong;        // consistent but wrong answer
  std::string kind;
};

Question make_question(Rng& rng) {
  Question q;
  const double r = rng.uniform();
  const std::string tool = rng.pick(kTools);
  if (r < 0.5) {
    const std::string state = rng.pick(kStates);
    std::string other = state;
    while (other == state) other = rng.pick(kStates);
    q.kind = "tool";
    q.text = "What is the state of " + tool + "?";
    q.reference = "the " + tool + " is performing " + state;
    q.short_form = tool + " is performing " + state;
    q.inverted = state + " by the " + tool;
    q.verbose = "the " + tool + " is currently performing " + state;
    q.wrong = "the " + tool + " is performing " + other;
  } else if (r < 0.9) {
    const std::string loc = rng.pick(kLocations);
    std::string other = loc;
    while (other == loc) other = rng.pick(kLocations);
    q.kind = "location";
    q.text = "Where is " + tool + " located?";
    q.reference = "the " + tool + " is located at " + loc;
    q.short_form = tool + " is located at " + loc;
    q.inverted = loc + " holds the " + tool;
    q.verbose = "the " + tool + " is currently located at " + loc;
    q.wrong = "the " + tool + " is located at " + other;
  } else {
    q.kind = "organ";
    q.text = "What organ is being operated?";
    q.reference = "the organ being operated is the kidney";
    q.short_form = "organ being operated is the kidney";
    q.inverted = "kidney is the organ being operated";
    q.verbose = "the organ being operated is clearly the kidney";
    q.wrong = "the organ being operated is the liver";
  }
  return q;
}

std::string word_salad(Rng& rng, int min_words, int max_words) {
  const int k = min_words + static_cast<int>(rng.index(static_cast<std::size_t>(max_words - min_words + 1)));
  std::string s;
  for (int i = 0; i < k; ++i) s += (i ? " " : "") + std::string(rng.pick(kLexicon));
  return s;
}

std::vector<double> unit_vector(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0;
  for (auto& x : v) {
    x = rng.normal(0, 1);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

// Vector with cosine exactly `c` to unit vector q.
std::vector<double> at_cosine(Rng& rng, const std::vector<double>& q, double c) {
  std::vector<double> u = unit_vector(rng, static_cast<int>(q.size()));
  double dot = 0;
  for (std::size_t i = 0; i < q.size(); ++i) dot += u[i] * q[i];
  double norm = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    u[i] -= dot * q[i];
    norm += u[i] * u[i];
  }
  norm = std::sqrt(norm);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = c * q[i] + s * u[i] / norm;
  return out;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
  if (spec.grounded <= 0 || spec.hallucinated <= 0) {
    throw ValidationError("synthetic spec needs at least one grounded and one hallucinated record");
  }
  if (spec.n_samples < 2) throw ValidationError("synthetic spec needs n_samples >= 2");
  Rng rng(spec.seed);
  const int total = spec.grounded + spec.hallucinated;

  std::vector<bool> planted(static_cast<std::size_t>(total), false);
  std::fill(planted.begin() + spec.grounded, planted.end(), true);
  for (std::size_t i = planted.size() - 1; i > 0; --i) {
    const std::size_t j = rng.index(i + 1);
    const bool tmp = planted[i];
    planted[i] = planted[j];
    planted[j] = tmp;
  }

  SynthData data;
  data.planted_hallucination = planted;
  data.manifest.name = "synth";
  data.manifest.split = Split::kInTemplate;
  data.manifest.record_count = static_cast<std::size_t>(total);
  data.manifest.generation_config = GenerationConfig{};
  data.manifest.generation_config->n_samples = spec.n_samples;
  data.manifest.generation_config->model_name = "synthetic";

  const auto n = static_cast<std::size_t>(spec.n_samples);
  for (int r = 0; r < total; ++r) {
    const bool halluc = planted[static_cast<std::size_t>(r)];
    const Question q = make_question(rng);
    char id[32];
    std::snprintf(id, sizeof id, "synth-%04d", r);

    std::vector<std::string> samples;
    std::vector<double> latent;  // per-sample question alignment in [0, 1]
    std::string greedy;
    std::string profile;
    if (!halluc) {
      profile = "grounded";
      const std::size_t misaligned =
          rng.uniform() < spec.misaligned_mix_rate ? 1 + rng.index(2) : 0;
      // A model that drifts off-topic in its samples also answers less
      // precisely when greedy, so utility tracks consistency.
      greedy = misaligned ? q.short_form : "The " + q.reference.substr(4) + ".";
      for (std::size_t i = 0; i < n; ++i) {
        if (i < misaligned) {
          samples.push_back(rng.pick(kOffTopic));
          latent.push_back(rng.normal(0.1, 0.02));
          continue;
        }
        const double u = rng.uniform();
        samples.push_back(u < 0.65   ? q.reference
                          : u < 0.8  ? q.short_form
                          : u < 0.92 ? q.verbose
                                     : q.inverted);
        latent.push_back(rng.normal(0.9, 0.004));
      }
      if (misaligned) profile = "grounded_mixed";
    } else {
      const TokenSeq ref = tokenize(q.reference);
      const std::set<std::string> ref_tokens(ref.tokens.begin(), ref.tokens.end());
      auto overlaps = [&](const std::string& text) {
        const TokenSeq t = tokenize(text);
        return std::any_of(t.tokens.begin(), t.tokens.end(),
                           [&](const std::string& w) { return ref_tokens.count(w) > 0; });
      };
      do {
        greedy = word_salad(rng, 2, 4);
      } while (overlaps(greedy));
      if (rng.uniform() < spec.confident_hallucination_rate) {
        profile = "confident_hallucination";
        for (std::size_t i = 0; i < n; ++i) {
          samples.push_back(q.wrong);
          latent.push_back(rng.normal(0.45, 0.004));
        }
      } else {
        profile = "hallucinated";
        for (std::size_t i = 0; i < n; ++i) {
          samples.push_back(word_salad(rng, 3, 5));
          latent.push_back(rng.uniform(0.3, 0.8));
        }
      }
    }
    for (auto& c : latent) c = std::clamp(c, 0.0, 1.0);

    QARecord rec;
    rec.id = id;
    rec.question = q.text;
    rec.reference_answer = q.reference;
    rec.meta = Json{{"split", "in_template"}, {"kind", q.kind}, {"profile", profile}};
    data.records.push_back(rec);
    data.samples.push_back(SampleSet{rec.id, greedy, samples, *data.manifest.generation_config});

    const auto q_emb = unit_vector(rng, spec.embedding_dim);
    AlignmentRecord emb{rec.id, Variant::kEmb, std::nullopt, q_emb, {}};
    AlignmentRecord ent{rec.id, Variant::kEnt, std::nullopt, std::nullopt, {}};
    AlignmentRecord cross{rec.id, Variant::kCrossE, std::nullopt, std::nullopt, {}};
    for (double c : latent) {
      AlignmentPayload pe;
      pe.embedding = at_cosine(rng, q_emb, c);
      emb.samples.push_back(std::move(pe));
      AlignmentPayload pn;
      pn.nli = RawNli{3.0 * c - 1.0 + rng.normal(0, 0.01), 1.5 - 3.0 * c + rng.normal(0, 0.01),
                      2.5 * c - 0.8 + rng.normal(0, 0.01), 1.2 - 2.5 * c + rng.normal(0, 0.01)};
      ent.samples.push_back(pn);
      AlignmentPayload pc;
      pc.rel = 8.0 * c - 3.0 + rng.normal(0, 0.01);
      cross.samples.push_back(pc);
    }
    data.emb.push_back(std::move(emb));
    data.ent.push_back(std::move(ent));
    data.crosse.push_back(std::move(cross));
  }
  return data;
}

SynthPaths synth_paths(const std::filesystem::path& dir) {
  return SynthPaths{dir / "dataset.jsonl",        dir / "samples.jsonl",
                    dir / "manifest.json",        dir / "alignment_emb.jsonl",
                    dir / "alignment_ent.jsonl",  dir / "alignment_crosse.jsonl"};
}

SynthPaths write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SynthPaths p = synth_paths(dir);
  write_jsonl<QARecord>(p.dataset, data.records);
  write_jsonl<SampleSet>(p.samples, data.samples);
  write_jsonl<AlignmentRecord>(p.emb, data.emb);
  write_jsonl<AlignmentRecord>(p.ent, data.ent);
  write_jsonl<AlignmentRecord>(p.crosse, data.crosse);
  std::ofstream(p.manifest) << to_json(data.manifest).dump(2) << '\n';
  return p;
}

}  // namespace qasnne
