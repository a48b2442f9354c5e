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

#include "unlearnlab/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

namespace unlearnlab {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void ValidateAdam(const AdamConfig& a) {
  if (!(a.learning_rate > 0.0) || !std::isfinite(a.learning_rate)) {
    throw ValidationError("learning rate must be finite and > 0");
  }
  if (!(a.beta1 >= 0.0 && a.beta1 < 1.0) || !(a.beta2 >= 0.0 && a.beta2 < 1.0)) {
    throw ValidationError("Adam decay rates must lie in [0, 1)");
  }
  if (!(a.epsilon > 0.0)) throw ValidationError("Adam epsilon must be > 0");
  if (!(a.weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
}

std::vector<Triple> Gather(std::span<const Triple> data, const std::vector<std::size_t>& idx) {
  std::vector<Triple> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

// Shared Adam loop. `loss_terms` are evaluated on the batch for each step.
TrainResult RunLoop(const ModelParams& start, std::span<const Triple> data,
                    std::span<const WeightedLoss> loss_terms, const AdamConfig& adam,
                    int batch_size, std::uint64_t seed, int total_steps,
                    const ResumeState* resume, RunRecord record,
                    const std::function<bool(const ModelParams&)>& converged_fn,
                    int check_interval) {
  const auto t0 = Clock::now();
  TrainResult result;
  if (resume != nullptr) {
    if (!(resume->params.config == start.config)) {
      throw ConfigMismatchError("resume state config differs from the run's model config");
    }
    result.params = resume->params;
    result.optimizer = resume->optimizer;
    result.optimizer.config = adam;
  } else {
    result.params = start;
    result.optimizer = OptimizerState(start.config, adam);
  }
  record.seed = seed;

  const bool full_batch = batch_size <= 0 || static_cast<std::size_t>(batch_size) >= data.size();
  std::int64_t step = result.optimizer.step;
  bool converged = converged_fn && converged_fn(result.params);
  while (!converged && step < total_steps) {
    LossAndGradient lg;
    bool finite = true;
    try {
      if (full_batch) {
        lg = ComputeLossAndGradient(result.params, loss_terms, data);
      } else {
        const std::vector<Triple> batch =
            Gather(data, BatchIndices(data.size(), batch_size, seed, step));
        lg = ComputeLossAndGradient(result.params, loss_terms, batch);
      }
    } catch (const NonFiniteLossError&) {
      finite = false;
    }
    if (!finite || !std::isfinite(lg.value) || !std::isfinite(lg.gradient.MaxAbs())) {
      record.steps = static_cast<int>(step);
      record.wall_clock_seconds = SecondsSince(t0);
      throw TrainingDiverged("non-finite loss at step " + std::to_string(step + 1),
                             std::move(record));
    }
    record.loss_trace.push_back(lg.value);
    AdamStep(result.params, lg.gradient, result.optimizer);
    ++step;
    if (converged_fn && (step % check_interval == 0 || step == total_steps)) {
      converged = converged_fn(result.params);
    }
  }
  record.steps = static_cast<int>(step);
  record.converged = converged;
  record.params_checksum = ParamsChecksum(result.params);
  record.wall_clock_seconds = SecondsSince(t0);
  result.record = std::move(record);
  return result;
}

}  // namespace

void TrainConfig::Validate() const {
  if (max_steps < 0) throw ValidationError("max_steps must be >= 0");
  if (batch_size < 0) throw ValidationError("batch_size must be >= 0");
  if (check_interval < 1) throw ValidationError("check_interval must be >= 1");
  if (!(convergence_prob < 1.0)) throw ValidationError("convergence_prob must be < 1");
  ValidateAdam(adam);
}

text::KeyValues TrainConfig::ToKeyValues() const {
  return {
      {"max_steps", std::to_string(max_steps)},
      {"learning_rate", text::FormatDouble(adam.learning_rate)},
      {"adam_beta1", text::FormatDouble(adam.beta1)},
      {"adam_beta2", text::FormatDouble(adam.beta2)},
      {"adam_epsilon", text::FormatDouble(adam.epsilon)},
      {"weight_decay", text::FormatDouble(adam.weight_decay)},
      {"batch_size", std::to_string(batch_size)},
      {"convergence_prob", text::FormatDouble(convergence_prob)},
      {"check_interval", std::to_string(check_interval)},
      {"seed", std::to_string(seed)},
      {"large_model_learning_rate", text::FormatDouble(kLargeModelLearningRate)},
      {"large_model_batch_size", std::to_string(kLargeModelBatchSize)},
  };
}

std::string RunRecord::ConfigHash() const {
  return text::HexDigest(text::Fnv1a(text::FormatKeyValues(config)));
}

std::string RunRecord::ToJson() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["config_hash"] = ConfigHash();
  j["seed"] = seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  j["steps"] = steps;
  j["converged"] = converged;
  j["checkpoint_path"] = checkpoint_path;
  j["params_checksum"] = params_checksum;
  // Strings keep all 17 digits regardless of the JSON number printer.
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (double v : loss_trace) trace.push_back(text::FormatDouble(v));
  j["loss_trace"] = trace;
  return j.dump(2) + "\n";
}

std::string RunRecord::TimingJson() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["config_hash"] = ConfigHash();
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j.dump(2) + "\n";
}

TokenProbabilityStats AnswerTokenStats(const ModelParams& params,
                                       std::span<const Triple> data) {
  if (data.empty()) throw ValidationError("token statistics of an empty set");
  TokenProbabilityStats s;
  s.min = std::numeric_limits<double>::infinity();
  double sum_p = 0.0;
  double sum_lp = 0.0;
  for (const Triple& t : data) {
    const auto acts = ForwardAnswer(params, t.image, t.question, t.answer);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const double lp = acts[i].dist.log_probs[t.answer[i]];
      const double p = std::exp(lp);
      s.min = std::min(s.min, p);
      sum_p += p;
      sum_lp += lp;
      ++s.num_tokens;
    }
  }
  s.mean = sum_p / s.num_tokens;
  s.geometric_mean = std::exp(sum_lp / s.num_tokens);
  return s;
}

std::vector<std::size_t> BatchIndices(std::size_t num_items, int batch_size,
                                      std::uint64_t seed, std::int64_t step) {
  if (num_items == 0) throw ValidationError("cannot batch an empty set");
  std::vector<std::size_t> order(num_items);
  std::iota(order.begin(), order.end(), 0);
  if (batch_size <= 0 || static_cast<std::size_t>(batch_size) >= num_items) return order;
  const std::size_t per_epoch = (num_items + batch_size - 1) / batch_size;
  const std::uint64_t epoch = static_cast<std::uint64_t>(step) / per_epoch;
  const std::size_t slot = static_cast<std::size_t>(step) % per_epoch;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t begin = slot * batch_size;
  const std::size_t end = std::min(num_items, begin + batch_size);
  return std::vector<std::size_t>(order.begin() + begin, order.begin() + end);
}

TrainResult TrainFull(const ModelParams& params_init, std::span<const Triple> data,
                      const TrainConfig& config, const ResumeState* resume,
                      std::string kind) {
  config.Validate();
  if (data.empty()) throw ValidationError("training set is empty");
  for (const Triple& t : data) ValidateTriple(params_init.config, t);

  RunRecord record;
  record.kind = std::move(kind);
  record.config = config.ToKeyValues();
  record.config["objective"] = "nll";
  record.config["num_triples"] = std::to_string(data.size());

  std::function<bool(const ModelParams&)> converged_fn;
  if (config.convergence_prob > 0.0) {
    converged_fn = [&](const ModelParams& p) {
      return AnswerTokenStats(p, data).min >= config.convergence_prob;
    };
  }
  const std::vector<WeightedLoss> terms = {{1.0, NllObjective{}}};
  return RunLoop(params_init, data, terms, config.adam, config.batch_size, config.seed,
                 config.max_steps, resume, std::move(record), converged_fn,
                 config.check_interval);
}

std::vector<WeightedLoss> UnlearnObjective(const UnlearnConfig& config,
                                           const ModelParams& params_full,
                                           std::span<const Triple> forget_set,
                                           const ReferenceMap* references,
                                           const IdkPool* pool) {
  switch (config.method) {
    case Method::kGA:
      return {{1.0, GaObjective{}}};
    case Method::kViKeR: {
      if (references == nullptr) {
        throw ValidationError("ViKeR needs precomputed reference distributions");
      }
      for (const Triple& t : forget_set) {
        if (!references->contains(t.id)) {
          throw ValidationError("no reference distributions for forget triple " +
                                std::to_string(t.id));
        }
      }
      return {{1.0, VikerObjective{references, config.lambda, config.regularizer, true}}};
    }
    case Method::kNPO:
      return {{1.0, NpoObjective{&params_full, config.beta}}};
    case Method::kIdkPO: {
      if (pool == nullptr) throw ValidationError("IdkPO needs a refusal pool");
      pool->Validate(params_full.config);
      return {{1.0, IdkpoObjective{&params_full, pool,
                                   AssignIdkResponses(forget_set, *pool, config.seed),
                                   config.beta}}};
    }
  }
  throw ValidationError("unknown unlearning method");
}

TrainResult Unlearn(const ModelParams& params_full, std::span<const Triple> forget_set,
                    const UnlearnConfig& config, const ReferenceMap* references,
                    const IdkPool* pool, const ResumeState* resume) {
  config.Validate();
  if (forget_set.empty()) throw ValidationError("forget set is empty");
  for (const Triple& t : forget_set) ValidateTriple(params_full.config, t);

  const ModelParams frozen_full = params_full;
  const std::vector<WeightedLoss> terms =
      UnlearnObjective(config, frozen_full, forget_set, references, pool);

  RunRecord record;
  record.kind = "unlearn";
  record.config = text::ParseKeyValues(config.ToText());
  record.config["num_forget_triples"] = std::to_string(forget_set.size());
  record.config["large_model_learning_rate"] = text::FormatDouble(kLargeModelLearningRate);
  record.config["large_model_batch_size"] = std::to_string(kLargeModelBatchSize);

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  adam.beta1 = config.adam_beta1;
  adam.beta2 = config.adam_beta2;
  adam.epsilon = config.adam_epsilon;
  adam.weight_decay = config.weight_decay;
  return RunLoop(frozen_full, forget_set, terms, adam, config.batch_size, config.seed,
                 config.steps, resume, std::move(record), nullptr, 1);
}

}  // namespace unlearnlab
