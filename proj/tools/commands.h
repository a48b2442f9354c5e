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

// Subcommands of the unlearnlab tool. Every command validates its inputs
// before writing anything and puts all outputs under --out. Wall-clock
// times go to <out>/timing.json so the other files are byte-reproducible.

#ifndef UNLEARNLAB_TOOLS_COMMANDS_H_
#define UNLEARNLAB_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>

namespace unlearnlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitVerification = 2;

// Reference-distribution cache directory; defaults to <out>/ref_cache.
inline constexpr const char* kCacheDirEnv = "UNLEARNLAB_CACHE_DIR";

struct SynthOptions {
  std::string spec_path;  // empty = defaults
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> forget_fraction;
};

struct TrainOptions {
  std::string data;
  std::string out;
  std::uint64_t seed = 1;
  int hidden_dim = 16;
  int max_positions = 24;
  int pretrain_steps = 300;
  int max_steps = 4000;
  double learning_rate = 1e-2;
};

struct UnlearnOptions {
  std::string method = "viker";
  std::optional<double> lambda;
  std::optional<int> k;
  std::optional<double> beta;
  std::optional<std::string> reg;
  std::string refs = "people";
  std::string checkpoint;
  std::string data;
  std::string resume;  // optional partial run to continue
  int steps = 200;
  std::uint64_t seed = 1;
  double learning_rate = 1e-2;
  std::string out;
};

struct RefdistOptions {
  std::string checkpoint;
  std::string data;
  std::string refs = "people";
  int k = 5;
  std::string split = "forget";
  std::string out;
};

struct EvalOptions {
  std::string checkpoint;
  std::string origin;
  std::string data;
  std::string out;
};

struct VerifyGradOptions {
  std::string checkpoint;
  std::string data;
  double lambda = 0.5;
  int k = 5;
  std::string refs = "people";
  int num_triples = 2;
  std::uint64_t seed = 1;
  std::string out;
  bool perturb = false;  // corrupts the analytic gradients (test fixture)
};

struct DumpDistOptions {
  std::string checkpoint;
  std::int64_t triple = 0;
  std::string data;
  std::string refs = "people";
  int k = 5;
  std::string out;
};

struct ReportOptions {
  std::string runs;
  std::string out;
};

int RunSynth(const SynthOptions& o);
int RunTrain(const TrainOptions& o);
int RunUnlearn(const UnlearnOptions& o);
int RunRefdist(const RefdistOptions& o);
int RunEval(const EvalOptions& o);
int RunVerifyGrad(const VerifyGradOptions& o);
int RunDumpDist(const DumpDistOptions& o);
int RunReport(const ReportOptions& o);

// Parses argv, dispatches, and maps exceptions onto the exit-code contract.
int Main(int argc, char** argv);

}  // namespace unlearnlab::cli

#endif  // UNLEARNLAB_TOOLS_COMMANDS_H_
