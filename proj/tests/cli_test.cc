// Copyright 2026 The unlearnlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the command-line tool as a subprocess against a small benchmark.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "unlearnlab/text_format.h"

namespace {

namespace fs = std::filesystem;
namespace text = unlearnlab::text;

const fs::path& Root() {
  static const fs::path root = fs::path(::testing::TempDir()) /
                               ("unlearnlab_cli_test_" + std::to_string(::getpid()));
  return root;
}

struct Outcome {
  int code = -1;
  std::string stderr_text;
};

Outcome RunCli(const std::string& args) {
  const fs::path err = Root() / "last_stderr.txt";
  fs::create_directories(Root());
  const std::string cmd =
      std::string(UNLEARNLAB_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.stderr_text = fs::exists(err) ? text::ReadFile(err) : "";
  return o;
}

std::string P(const fs::path& p) { return p.string(); }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(Root());
    text::WriteFile(Root() / "small_spec.txt",
                    "# unlearnlab benchmark spec v1\nn_personas 12\nforget_fraction 0.25\n"
                    "seed 4\n");
    ASSERT_EQ(RunCli("synth --spec " + P(Root() / "small_spec.txt") + " --out " +
                  P(Root() / "data"))
                  .code,
              0);
    ASSERT_EQ(RunCli("train --data " + Data() + " --out " + P(Root() / "model") +
                  " --pretrain-steps 50 --max-steps 600 --seed 4")
                  .code,
              0);
  }

  static void TearDownTestSuite() { fs::remove_all(Root()); }

  static std::string Data() { return P(Root() / "data" / "dataset.txt"); }
  static std::string Full() { return P(Root() / "model" / "full.ckpt"); }
  static std::string Origin() { return P(Root() / "model" / "origin.ckpt"); }

  static Outcome Unlearn(const std::string& method, const fs::path& out,
                         const std::string& extra = "") {
    return RunCli("unlearn --method " + method + " --checkpoint " + Full() + " --data " + Data() +
               " --steps 10 --out " + P(out) + " " + extra);
  }
};

TEST_F(CliTest, HelpAndUnknownCommands) {
  EXPECT_EQ(RunCli("--help").code, 0);
  EXPECT_EQ(RunCli("frobnicate").code, 1);
  EXPECT_EQ(RunCli("unlearn --method ga").code, 1);
}

TEST_F(CliTest, TrainWritesCheckpointsAndRecords) {
  for (const char* f : {"origin.ckpt", "full.ckpt", "pretrain_run.json", "train_run.json",
                        "timing.json"}) {
    EXPECT_TRUE(fs::exists(Root() / "model" / f)) << f;
  }
}

TEST_F(CliTest, SynthIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(RunCli("synth --spec " + P(Root() / "small_spec.txt") + " --out " +
                P(Root() / "data_again"))
                .code,
            0);
  for (const char* f : {"dataset.txt", "manifest.txt"}) {
    EXPECT_EQ(text::ReadFile(Root() / "data" / f), text::ReadFile(Root() / "data_again" / f))
        << f;
  }
}

TEST_F(CliTest, SynthRejectsBadSpecWithoutWriting) {
  const Outcome o =
      RunCli("synth --defaults --forget-fraction 1.5 --out " + P(Root() / "bad_synth"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.stderr_text.find("forget_fraction"), std::string::npos);
  EXPECT_FALSE(fs::exists(Root() / "bad_synth" / "dataset.txt"));
}

TEST_F(CliTest, GaWritesNoReferenceCacheAndVikerDoes) {
  ASSERT_EQ(Unlearn("ga", Root() / "ga").code, 0);
  EXPECT_FALSE(fs::exists(Root() / "ga" / "ref_cache"));
  ASSERT_EQ(Unlearn("viker", Root() / "viker").code, 0);
  ASSERT_TRUE(fs::exists(Root() / "viker" / "ref_cache"));
  EXPECT_FALSE(fs::is_empty(Root() / "viker" / "ref_cache"));
  for (const char* f : {"unlearned.ckpt", "run.json", "unlearn_config.txt", "timing.json"}) {
    EXPECT_TRUE(fs::exists(Root() / "viker" / f)) << f;
  }
}

TEST_F(CliTest, UnlearnIsDeterministic) {
  ASSERT_EQ(Unlearn("viker", Root() / "det_a", "--reg jsd").code, 0);
  ASSERT_EQ(Unlearn("viker", Root() / "det_b", "--reg jsd").code, 0);
  EXPECT_EQ(text::ReadFile(Root() / "det_a" / "unlearned.ckpt"),
            text::ReadFile(Root() / "det_b" / "unlearned.ckpt"));
  EXPECT_EQ(text::ReadFile(Root() / "det_a" / "run.json"),
            text::ReadFile(Root() / "det_b" / "run.json"));
}

TEST_F(CliTest, ResumedRunMatchesUninterruptedRun) {
  ASSERT_EQ(RunCli("unlearn --method npo --checkpoint " + Full() + " --data " + Data() +
                " --steps 4 --out " + P(Root() / "part"))
                .code,
            0);
  ASSERT_EQ(Unlearn("npo", Root() / "resumed",
                    "--resume " + P(Root() / "part" / "unlearned.ckpt"))
                .code,
            0);
  ASSERT_EQ(Unlearn("npo", Root() / "straight").code, 0);
  EXPECT_EQ(text::ReadFile(Root() / "resumed" / "unlearned.ckpt"),
            text::ReadFile(Root() / "straight" / "unlearned.ckpt"));
}

TEST_F(CliTest, IrrelevantFlagsWarn) {
  const Outcome o = Unlearn("ga", Root() / "warn", "--lambda 0.3");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.stderr_text.find("--lambda is ignored"), std::string::npos);
}

TEST_F(CliTest, MissingReferencePoolIsNamed) {
  std::string contents = text::ReadFile(Data());
  std::string filtered;
  for (const std::string& line : text::Split(contents, '\n')) {
    if (line.rfind("pool scene ", 0) == 0) continue;
    filtered += line + "\n";
  }
  filtered.pop_back();
  text::WriteFile(Root() / "no_scene.txt", filtered);
  const Outcome o = RunCli("unlearn --method viker --refs scene --checkpoint " + Full() +
                        " --data " + P(Root() / "no_scene.txt") + " --out " +
                        P(Root() / "no_scene"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.stderr_text.find("scene"), std::string::npos);
  EXPECT_FALSE(fs::exists(Root() / "no_scene" / "unlearned.ckpt"));
}

TEST_F(CliTest, MissingCheckpointIsValidationError) {
  const Outcome o = RunCli("eval --checkpoint " + P(Root() / "nope.ckpt") + " --origin " +
                        Origin() + " --data " + Data() + " --out " + P(Root() / "nope"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.stderr_text.find("nope.ckpt"), std::string::npos);
}

TEST_F(CliTest, EvalWritesOneRowPerSplitAndMetric) {
  ASSERT_EQ(Unlearn("ga", Root() / "eval_ga").code, 0);
  ASSERT_EQ(RunCli("eval --checkpoint " + P(Root() / "eval_ga" / "unlearned.ckpt") +
                " --origin " + Origin() + " --data " + Data() + " --out " +
                P(Root() / "eval_ga"))
                .code,
            0);
  const auto lines = text::Split(text::ReadFile(Root() / "eval_ga" / "metrics.csv"), '\n');
  // Header, 3 splits x 5 metrics, trailing empty field.
  EXPECT_EQ(lines.size(), 17u);
  EXPECT_EQ(lines[0], "split,metric,mean,std,n");
  EXPECT_TRUE(fs::exists(Root() / "eval_ga" / "generations.tsv"));
  EXPECT_TRUE(fs::exists(Root() / "eval_ga" / "eval_manifest.txt"));
}

TEST_F(CliTest, ReportAggregatesAndRejectsMixedDatasets) {
  for (const char* seed : {"1", "2"}) {
    const fs::path dir = Root() / "runs" / (std::string("ga_") + seed);
    ASSERT_EQ(Unlearn("ga", dir, std::string("--seed ") + seed).code, 0);
    ASSERT_EQ(RunCli("eval --checkpoint " + P(dir / "unlearned.ckpt") + " --origin " + Origin() +
                  " --data " + Data() + " --out " + P(dir))
                  .code,
              0);
  }
  ASSERT_EQ(RunCli("report --runs " + P(Root() / "runs") + " --out " + P(Root() / "report")).code,
            0);
  const std::string csv = text::ReadFile(Root() / "report" / "report.csv");
  EXPECT_NE(csv.find("ga,forget,rouge_l,"), std::string::npos);
  EXPECT_NE(csv.find(",2\n"), std::string::npos);

  // Relabel one run as coming from another dataset.
  const fs::path manifest = Root() / "runs" / "ga_2" / "eval_manifest.txt";
  auto kv = text::ParseKeyValues(text::ReadFile(manifest));
  kv["dataset_hash"] = "0000000000000000";
  text::WriteFile(manifest, text::FormatKeyValues(kv));
  const Outcome o = RunCli("report --runs " + P(Root() / "runs") + " --out " +
                        P(Root() / "report_bad"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.stderr_text.find("dataset"), std::string::npos);
}

TEST_F(CliTest, VerifyGradPassesAndPerturbedFails) {
  const std::string base = "verify-grad --checkpoint " + Full() + " --data " + Data() +
                           " --num-triples 1 --out ";
  EXPECT_EQ(RunCli(base + P(Root() / "verify")).code, 0);
  EXPECT_TRUE(fs::exists(Root() / "verify" / "verify_report.json"));
  EXPECT_EQ(RunCli(base + P(Root() / "verify_bad") + " --perturb").code, 2);
}

TEST_F(CliTest, DumpDistHasTwoRowsPerAnswerToken) {
  const std::string dataset = text::ReadFile(Data());
  const std::size_t at = dataset.find("triple\t");
  ASSERT_NE(at, std::string::npos);
  const auto fields = text::Split(dataset.substr(at, dataset.find('\n', at) - at), '\t');
  const std::string id = fields[1];
  const std::size_t answer_len = text::SplitWhitespace(fields[6]).size();
  ASSERT_EQ(RunCli("dump-dist --checkpoint " + Full() + " --data " + Data() + " --triple " + id +
                " --out " + P(Root() / "dump"))
                .code,
            0);
  const auto lines =
      text::Split(text::ReadFile(Root() / "dump" / ("dist_" + id + ".csv")), '\n');
  EXPECT_EQ(lines.size(), 1 + 2 * answer_len + 1);
  EXPECT_EQ(lines[0].rfind("table,position,token,token_prob,entropy,is_normal,is_key,p0,", 0),
            0u);
}

}  // namespace
