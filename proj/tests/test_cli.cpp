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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "qasnne/records.hpp"
#include "support.hpp"

namespace qasnne {
namespace {

using testing::slurp;
using testing::TempDir;

struct CliRun {
  int status = -1;
  std::string err;
};

// Runs the CLI with `args` inside `dir`, capturing stderr.
CliRun cli(const TempDir& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.path().string() + "' && '" QASNNE_CLI_PATH "' " + args +
                          " > stdout.txt 2> stderr.txt";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(dir / "stderr.txt");
  return r;
}

const char* kAlign =
    "--align Emb=d/alignment_emb.jsonl --align Ent=d/alignment_ent.jsonl "
    "--align CrossE=d/alignment_crosse.jsonl";

void run_pipeline(const TempDir& dir, const std::string& report_dir) {
  ASSERT_EQ(cli(dir, "synth --out-dir d --grounded 20 --hallucinated 20").status, 0);
  ASSERT_EQ(cli(dir, "label --dataset d/dataset.jsonl --samples d/samples.jsonl --out d/labels.jsonl")
                .status,
            0);
  ASSERT_EQ(cli(dir, std::string("score --dataset d/dataset.jsonl --samples d/samples.jsonl --out "
                                 "d/results.jsonl ") + kAlign)
                .status,
            0);
  const CliRun ev = cli(dir, "evaluate --labels d/labels.jsonl --results d/results.jsonl "
                          "--manifest d/manifest.json --out-dir " + report_dir);
  ASSERT_EQ(ev.status, 0) << ev.err;
}

TEST(Cli, EndToEndIsReproducible) {
  TempDir dir;
  run_pipeline(dir, "r1");
  const Json report = Json::parse(slurp(dir / "r1" / "report.json"));
  EXPECT_EQ(report["counts"]["records"], 40);
  EXPECT_EQ(report["counts"]["positives"], 20);
  for (const char* e : {"dse", "snne", "qa_snne_emb", "qa_snne_ent", "qa_snne_crosse"}) {
    EXPECT_TRUE(report["estimators"].contains(e)) << e;
    EXPECT_TRUE(std::filesystem::exists(dir / "r1" / (std::string("prc_") + e + ".csv")));
  }
  EXPECT_FALSE(report["config_hash"].get<std::string>().empty());
  EXPECT_TRUE(report["provenance"]["config"].is_object());
  // The output directory is part of the config, so point the rerun at the
  // same place to compare bytes.
  const std::string first = slurp(dir / "r1" / "report.json");
  ASSERT_EQ(cli(dir, "evaluate --labels d/labels.jsonl --results d/results.jsonl "
                     "--manifest d/manifest.json --out-dir r1")
                .status,
            0);
  EXPECT_EQ(slurp(dir / "r1" / "report.json"), first);
  // Every JSONL artifact has provenance next to it.
  for (const char* f : {"d/labels.jsonl", "d/results.jsonl", "d/samples.jsonl"}) {
    const Json meta = Json::parse(slurp(dir / (std::string(f) + ".meta.json")));
    EXPECT_TRUE(meta.contains("config_hash")) << f;
    EXPECT_TRUE(meta["config"].is_object()) << f;
  }
}

TEST(Cli, ScoresAreByteIdenticalAcrossRuns) {
  TempDir dir;
  ASSERT_EQ(cli(dir, "synth --out-dir d --grounded 10 --hallucinated 10").status, 0);
  const std::string score = std::string("score --dataset d/dataset.jsonl --samples d/samples.jsonl ") +
                            kAlign + " --out d/results.jsonl";
  ASSERT_EQ(cli(dir, score).status, 0);
  const std::string first = slurp(dir / "d/results.jsonl");
  ASSERT_EQ(cli(dir, score).status, 0);
  EXPECT_EQ(slurp(dir / "d/results.jsonl"), first);
}

TEST(Cli, EvaluateWithoutLabelsNamesMissingStage) {
  TempDir dir;
  const CliRun r = cli(dir, "evaluate --results results.jsonl --out-dir r");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("qasnne label"), std::string::npos) << r.err;
}

TEST(Cli, ValidationErrorsExitOne) {
  TempDir dir;
  ASSERT_EQ(cli(dir, "synth --out-dir d --grounded 4 --hallucinated 4").status, 0);
  const std::string base = "score --dataset d/dataset.jsonl --samples d/samples.jsonl ";
  EXPECT_EQ(cli(dir, base + "--estimators snne,bogus").status, 1);
  const CliRun missing = cli(dir, base + "--estimators qa_snne_ent");
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("align"), std::string::npos) << missing.err;
  const CliRun conflict = cli(dir, base + "--backend service --scorer-url http://127.0.0.1:1 "
                                       "--align Emb=d/alignment_emb.jsonl");
  EXPECT_EQ(conflict.status, 1);
  EXPECT_NE(conflict.err.find("conflicting"), std::string::npos) << conflict.err;
  EXPECT_EQ(cli(dir, "frobnicate").status, 1);
  EXPECT_EQ(cli(dir, "synth --grounded 0 --out-dir z").status, 1);
}

TEST(Cli, BackendFailureExitsTwo) {
  TempDir dir;
  ASSERT_EQ(cli(dir, "synth --out-dir d --grounded 2 --hallucinated 2").status, 0);
  const CliRun r = cli(dir, "align --dataset d/dataset.jsonl --samples d/samples.jsonl "
                         "--variant Emb --scorer-url http://127.0.0.1:1 --out a.jsonl");
  EXPECT_EQ(r.status, 2) << r.err;
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  TempDir dir;
  dir.write("run.json", R"({"synth": {"grounded": 3, "hallucinated": 2}, "output_dir": "fromcfg"})");
  ASSERT_EQ(cli(dir, "synth --config run.json --hallucinated 4").status, 0);
  EXPECT_EQ(read_all(load_dataset(dir / "fromcfg/dataset.jsonl")).size(), 7u);
}

TEST(Cli, PrcAndCompare) {
  TempDir dir;
  run_pipeline(dir, "r");
  ASSERT_EQ(cli(dir, "prc --labels d/labels.jsonl --results d/results.jsonl --estimator snne "
                     "--out curves/snne.csv")
                .status,
            0);
  EXPECT_EQ(slurp(dir / "curves/snne.csv").rfind("rejection_fraction,", 0), 0u);

  // A report is not paired with itself unless its manifest says so.
  EXPECT_EQ(cli(dir, "compare --in r/report.json --out r/report.json --out-dir c").status, 1);
  Json in = Json::parse(slurp(dir / "r/report.json"));
  Json out = in;
  in["dataset"]["name"] = "set-in";
  out["dataset"]["name"] = "set-out";
  out["dataset"]["paired_with"] = "set-in";
  in["utility"]["bleu"] = 0.620;
  out["utility"]["bleu"] = 0.373;
  dir.write("in.json", in.dump());
  dir.write("out.json", out.dump());
  ASSERT_EQ(cli(dir, "compare --in in.json --out out.json --out-dir c").status, 0);
  const Json delta = Json::parse(slurp(dir / "c/compare.json"));
  bool found = false;
  for (const auto& m : delta["deltas"]) {
    if (m["metric"] == "bleu") {
      EXPECT_EQ(m["delta"].get<double>(), -0.247);
      EXPECT_TRUE(m["alert"].get<bool>());
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace qasnne
