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

// Unlearning objectives and the gradient engine behind them.
//
//   GA     (1/N) sum_s log p(y|I,x)
//   ViKeR  GA + (lambda/N) sum_s sum_i D(R_i || Q_i), R frozen
//   NPO    -(2/beta) mean log sigmoid(-beta * r_y)
//   IdkPO  -(1/beta) mean log sigmoid(beta * r_idk - beta * r_y)
//
// where Q_i = p_theta(. | I, x, y_{<i}) and r = log p_theta - log p_full of
// the whole answer.

#ifndef UNLEARNLAB_LOSSES_H_
#define UNLEARNLAB_LOSSES_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unlearnlab/model.h"
#include "unlearnlab/reference.h"

namespace unlearnlab {

enum class Method { kGA, kNPO, kIdkPO, kViKeR };
enum class Divergence { kKL, kJSD, kCoS };

std::string_view MethodName(Method m);
Method ParseMethod(std::string_view name);
std::string_view DivergenceName(Divergence d);
Divergence ParseDivergence(std::string_view name);

struct UnlearnConfig {
  Method method = Method::kViKeR;
  double lambda = 0.5;
  int k = 5;
  double beta = 0.4;
  Divergence regularizer = Divergence::kKL;
  ReferenceCategory reference_category = ReferenceCategory::kPeople;
  int steps = 200;
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.0;
  // 0 = full batch over the forget set.
  int batch_size = 0;
  std::uint64_t seed = 1;

  void Validate() const;
  // Flat key-value document; FromText starts from defaults and overrides.
  std::string ToText() const;
  static UnlearnConfig FromText(std::string_view text);
};

// Refusal-style answers for IdkPO.
struct IdkPool {
  std::vector<TokenSeq> responses;
  void Validate(const ModelConfig& config) const;
};

// Divergence between a fixed target R and a model distribution Q.
//   KL   sum_v R(v) (log R(v) - log Q(v)), R(v) = 0 terms skipped
//   JSD  KL(R||M)/2 + KL(Q||M)/2, M = (R + Q)/2
//   CoS  1 - <R, Q> / (|R| |Q|)
// Throws SimplexViolation for inputs that are not simplices within 1e-9.
double ComputeDivergence(const TokenDistribution& r, const TokenDistribution& q,
                         Divergence kind);

// d D(R, softmax(l)) / d l evaluated at Q = softmax(l).
std::vector<double> DivergenceLogitGradient(const TokenDistribution& r,
                                            const TokenDistribution& q,
                                            Divergence kind);

struct DivergenceWithGradient {
  double value = 0.0;
  std::vector<double> logit_gradient;
};

// Both of the above from one pass, as an unlearning step uses them.
DivergenceWithGradient DivergenceAndLogitGradient(const TokenDistribution& r,
                                                  const TokenDistribution& q,
                                                  Divergence kind);

struct NllObjective {};
struct GaObjective {};
struct VikerObjective {
  const ReferenceMap* references = nullptr;  // not owned
  double lambda = 0.5;
  Divergence kind = Divergence::kKL;
  bool include_ga_term = true;
};
struct NpoObjective {
  const ModelParams* params_full = nullptr;  // not owned, never mutated
  double beta = 0.4;
};
struct IdkpoObjective {
  const ModelParams* params_full = nullptr;
  const IdkPool* pool = nullptr;
  std::map<TripleId, std::size_t> assignment;  // triple id -> pool index
  double beta = 0.4;
};

using LossSpec =
    std::variant<NllObjective, GaObjective, VikerObjective, NpoObjective, IdkpoObjective>;

struct WeightedLoss {
  double weight = 1.0;
  LossSpec spec;
};

struct LossAndGradient {
  double value = 0.0;
  GradientVector gradient;
};

double LossValue(const ModelParams& params, const LossSpec& spec,
                 std::span<const Triple> data);
GradientVector LossGradient(const ModelParams& params, const LossSpec& spec,
                            std::span<const Triple> data);
LossAndGradient ComputeLossAndGradient(const ModelParams& params, const LossSpec& spec,
                                       std::span<const Triple> data);
// sum_t weight_t * loss_t. An empty list is the constant zero loss.
LossAndGradient ComputeLossAndGradient(const ModelParams& params,
                                       std::span<const WeightedLoss> terms,
                                       std::span<const Triple> data);

double GaLoss(const ModelParams& params, std::span<const Triple> forget_set);
double VikerLoss(const ModelParams& params, std::span<const Triple> forget_set,
                 const ReferenceMap& references, double lambda, Divergence kind);
double NpoLoss(const ModelParams& params, const ModelParams& params_full,
               std::span<const Triple> forget_set, double beta);
double IdkpoLoss(const ModelParams& params, const ModelParams& params_full,
                 std::span<const Triple> forget_set, const IdkPool& pool, double beta,
                 std::uint64_t seed);

// Seeded per-triple choice of refusal response, fixed for a whole run.
std::map<TripleId, std::size_t> AssignIdkResponses(std::span<const Triple> forget_set,
                                                   const IdkPool& pool,
                                                   std::uint64_t seed);

// log(sigmoid(x)) without overflow.
double LogSigmoid(double x);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_LOSSES_H_
