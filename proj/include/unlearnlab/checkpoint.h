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

// Adam state and the text checkpoint format.
//
// A checkpoint is a single text document:
//
//   # unlearnlab checkpoint v1
//   config <vocab_size> <img_dim> <hidden_dim> <max_positions>
//   meta <key> <value>                       (zero or more)
//   E <count> <v1> <v2> ...                  (also P, U, A, O, b)
//   adam <step> <lr> <beta1> <beta2> <eps> <weight_decay>   (optional)
//   m.E <count> ...   v.E <count> ...        (with adam, per tensor)
//   end
//
// Values use 17 significant digits so 64-bit floats round-trip exactly.

#ifndef UNLEARNLAB_CHECKPOINT_H_
#define UNLEARNLAB_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "unlearnlab/model.h"

namespace unlearnlab {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled

  bool operator==(const AdamConfig&) const = default;
};

struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  GradientVector first_moment;
  GradientVector second_moment;

  OptimizerState() = default;
  OptimizerState(const ModelConfig& model, const AdamConfig& adam)
      : config(adam), first_moment(model), second_moment(model) {}

  bool operator==(const OptimizerState&) const = default;
};

// One bias-corrected AdamW update in place.
void AdamStep(ModelParams& params, const GradientVector& grad, OptimizerState& state);

struct Checkpoint {
  ModelParams params;
  std::optional<OptimizerState> optimizer;
  std::map<std::string, std::string> meta;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws ParseError for malformed files.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
// As above, and throws ConfigMismatchError unless the stored config equals
// `expected`.
Checkpoint LoadCheckpoint(const std::filesystem::path& path, const ModelConfig& expected);

// FNV-1a over the 17-digit rendering of every parameter.
std::string ParamsChecksum(const ParamTensors& params);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_CHECKPOINT_H_
