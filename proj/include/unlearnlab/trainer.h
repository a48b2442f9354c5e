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

// Adam training loops: fine-tuning on the benchmark and unlearning runs.

#ifndef UNLEARNLAB_TRAINER_H_
#define UNLEARNLAB_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearnlab/checkpoint.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/losses.h"
#include "unlearnlab/model.h"
#include "unlearnlab/reference.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

// Optimizer settings for a 7B-parameter model. Recorded, never applied.
inline constexpr double kLargeModelLearningRate = 5e-6;
inline constexpr int kLargeModelBatchSize = 2;

struct TrainConfig {
  int max_steps = 4000;
  AdamConfig adam;
  int batch_size = 0;  // 0 = full batch
  // Stop once every answer token has probability >= this. <= 0 disables.
  double convergence_prob = 0.9;
  int check_interval = 25;
  std::uint64_t seed = 1;

  void Validate() const;
  text::KeyValues ToKeyValues() const;
};

struct RunRecord {
  std::string kind;  // "pretrain", "train_full" or "unlearn"
  text::KeyValues config;
  std::vector<double> loss_trace;  // one entry per executed step
  double wall_clock_seconds = 0.0;
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  int steps = 0;
  bool converged = false;
  std::string params_checksum;

  // FNV-1a over the config snapshot.
  std::string ConfigHash() const;
  // Everything except wall-clock time, so reruns compare byte-identical.
  std::string ToJson() const;
  std::string TimingJson() const;
};

// Thrown when a loss turns non-finite; carries the trace up to that point.
class TrainingDiverged : public NonFiniteLossError {
 public:
  TrainingDiverged(const std::string& what, RunRecord record)
      : NonFiniteLossError(what), record_(std::move(record)) {}
  const RunRecord& record() const { return record_; }

 private:
  RunRecord record_;
};

struct TrainResult {
  ModelParams params;
  RunRecord record;
  OptimizerState optimizer;
};

// Continues an interrupted run from `params` and `optimizer` (whose step
// counter says how many steps already ran).
struct ResumeState {
  ModelParams params;
  OptimizerState optimizer;
};

struct TokenProbabilityStats {
  double min = 0.0;
  double mean = 0.0;
  double geometric_mean = 0.0;  // exp of the mean log-probability
  int num_tokens = 0;
};

// Teacher-forced per-token probabilities of every answer token in `data`.
TokenProbabilityStats AnswerTokenStats(const ModelParams& params, std::span<const Triple> data);

// Minimizes the NLL of `data` with Adam over seeded-shuffled batches until
// the convergence check passes or max_steps is reached.
TrainResult TrainFull(const ModelParams& params_init, std::span<const Triple> data,
                      const TrainConfig& config, const ResumeState* resume = nullptr,
                      std::string kind = "train_full");

// Runs config.steps Adam updates of the configured method on the forget set.
// ViKeR needs `references` covering every forget triple; IdkPO needs `pool`.
// `params_full` is copied once and the copy stays frozen for ratio terms.
TrainResult Unlearn(const ModelParams& params_full, std::span<const Triple> forget_set,
                    const UnlearnConfig& config, const ReferenceMap* references = nullptr,
                    const IdkPool* pool = nullptr, const ResumeState* resume = nullptr);

// The loss minimized by Unlearn, with `params_full` as the frozen model.
std::vector<WeightedLoss> UnlearnObjective(const UnlearnConfig& config,
                                           const ModelParams& params_full,
                                           std::span<const Triple> forget_set,
                                           const ReferenceMap* references,
                                           const IdkPool* pool);

// Batch indices for a step, derived from (seed, epoch) only.
std::vector<std::size_t> BatchIndices(std::size_t num_items, int batch_size,
                                      std::uint64_t seed, std::int64_t step);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_TRAINER_H_
