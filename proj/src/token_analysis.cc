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

#include "unlearnlab/token_analysis.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "unlearnlab/errors.h"
#include "unlearnlab/losses.h"

namespace unlearnlab {

double Entropy(const TokenDistribution& dist) {
  dist.ValidateSimplex(1e-9);
  double h = 0.0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist.probs[v] > 0.0) h -= dist.probs[v] * dist.log_probs[v];
  }
  return h + 0.0;  // no negative zero
}

double EntropyUpperBound(double tau, int vocab_size) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  if (vocab_size < 2) return 0.0;
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  const double binary = -xlogx(tau) - xlogx(1.0 - tau);
  return binary + (1.0 - tau) * std::log(static_cast<double>(vocab_size - 1));
}

std::vector<TokenClassification> ClassifyTokens(const ReferenceDistributions& refs,
                                                const TokenSeq& answer, double tau,
                                                double epsilon) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (refs.size() != answer.size()) {
    throw ValidationError("references cover " + std::to_string(refs.size()) +
                          " positions but the answer has " +
                          std::to_string(answer.size()));
  }
  std::vector<TokenClassification> out;
  out.reserve(answer.size());
  for (std::size_t i = 0; i < answer.size(); ++i) {
    const TokenDistribution& r = refs.at(i);
    if (answer[i] < 0 || static_cast<std::size_t>(answer[i]) >= r.size()) {
      throw ValidationError("answer token outside reference vocabulary");
    }
    TokenClassification c;
    c.position = static_cast<int>(i) + 1;
    c.token = answer[i];
    c.entropy = Entropy(r);
    c.reference_prob = r.probs[answer[i]];
    c.is_normal = c.reference_prob >= tau;
    c.is_key = c.entropy >= epsilon;
    out.push_back(c);
  }
  return out;
}

double MedianEntropy(const ReferenceDistributions& refs) {
  if (refs.size() == 0) throw ValidationError("empty reference distributions");
  std::vector<double> h;
  for (const TokenDistribution& d : refs.per_position()) h.push_back(Entropy(d));
  std::sort(h.begin(), h.end());
  const std::size_t n = h.size();
  return n % 2 == 1 ? h[n / 2] : 0.5 * (h[n / 2 - 1] + h[n / 2]);
}

std::vector<TokenClassification> ClassifyTokens(const ReferenceDistributions& refs,
                                                const TokenSeq& answer, double tau) {
  // A zero median (all one-hot) still needs epsilon > 0.
  const double eps = std::max(MedianEntropy(refs), 1e-300);
  return ClassifyTokens(refs, answer, tau, eps);
}

int CountOverlap(const std::vector<TokenClassification>& classes) {
  return static_cast<int>(std::count_if(classes.begin(), classes.end(), [](const auto& c) {
    return c.is_normal && c.is_key;
  }));
}

namespace {

void CheckPosition(const ModelParams& params, const Triple& triple, int position) {
  ValidateTriple(params.config, triple);
  if (position < 1 || position > static_cast<int>(triple.answer.size())) {
    throw ValidationError("position " + std::to_string(position) +
                          " outside the answer of triple " + std::to_string(triple.id));
  }
}

PositionActivations ForwardAt(const ModelParams& params, const Triple& triple,
                              int position) {
  const std::span<const TokenId> answer(triple.answer);
  return ForwardPosition(params, triple.image, triple.question,
                         answer.first(position - 1), position);
}

GradientVector BackpropLogitGrad(const ModelParams& params, const Triple& triple,
                                 const PositionActivations& act,
                                 const std::vector<double>& logit_grad) {
  GradientVector g(params.config);
  BackwardPosition(params, triple.image, act, logit_grad, g);
  return g;
}

// d log softmax(l)_v / d l = onehot(v) - p.
std::vector<double> ScoreLogitGrad(const TokenDistribution& q, TokenId token) {
  std::vector<double> lg(q.size());
  for (std::size_t u = 0; u < q.size(); ++u) lg[u] = -q.probs[u];
  lg[token] += 1.0;
  return lg;
}

}  // namespace

GradientVector TokenLevelGaGradient(const ModelParams& params, const Triple& triple,
                                    int position, TokenId token) {
  CheckPosition(params, triple, position);
  if (token < 0 || token >= params.config.vocab_size) {
    throw ValidationError("token outside vocabulary");
  }
  const PositionActivations act = ForwardAt(params, triple, position);
  return BackpropLogitGrad(params, triple, act, ScoreLogitGrad(act.dist, token));
}

ReweightReport VerifyReweightedGradient(const ModelParams& params, const Triple& triple,
                                        const ReferenceDistributions& refs, double lambda,
                                        const VerifyOptions& options) {
  ValidateTriple(params.config, triple);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (refs.size() != triple.answer.size()) {
    throw ValidationError("missing reference for some position of triple " +
                          std::to_string(triple.id));
  }
  ReweightReport report;
  report.identity = "reweighted_gradient";
  report.triple_id = triple.id;
  report.lambda = lambda;
  report.tolerance = options.tolerance.value_or(kReweightTolerance);

  ReferenceMap single;
  single.emplace(triple.id, refs);
  const Triple one[] = {triple};
  GradientVector direct = LossGradient(
      params, VikerObjective{&single, lambda, Divergence::kKL, true}, one);
  if (options.direct_gradient_hook) options.direct_gradient_hook(direct);

  const int vocab = params.config.vocab_size;
  GradientVector reassembled(params.config);
  for (std::size_t i = 0; i < triple.answer.size(); ++i) {
    const int position = static_cast<int>(i) + 1;
    const PositionActivations act = ForwardAt(params, triple, position);
    std::vector<double> row(vocab);
    for (int v = 0; v < vocab; ++v) {
      const double c = (v == triple.answer[i] ? 1.0 : 0.0) - lambda * refs.at(i).probs[v];
      row[v] = c;
      if (v != triple.answer[i]) {
        report.max_off_target_coefficient =
            std::max(report.max_off_target_coefficient, std::abs(c));
      }
      if (c == 0.0) continue;
      reassembled.AddScaled(BackpropLogitGrad(params, triple, act, ScoreLogitGrad(act.dist, v)),
                            c);
    }
    report.coefficients.push_back(std::move(row));
  }
  report.max_discrepancy = direct.MaxAbsDiff(reassembled);
  report.pass = report.max_discrepancy < report.tolerance;
  return report;
}

ReweightReport VerifyNormalTokenScaling(const ModelParams& params, const Triple& triple,
                                        int position, double lambda,
                                        const VerifyOptions& options) {
  CheckPosition(params, triple, position);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  ReweightReport report;
  report.identity = "normal_token_scaling";
  report.triple_id = triple.id;
  report.lambda = lambda;
  report.position = position;
  report.tolerance = options.tolerance.value_or(kNormalScalingTolerance);

  const TokenId y = triple.answer[position - 1];
  const int vocab = params.config.vocab_size;
  const TokenDistribution one_hot = TokenDistribution::OneHot(vocab, y);
  const PositionActivations act = ForwardAt(params, triple, position);

  // Direct: differentiate log Q(y) + lambda KL(onehot(y) || Q) at this position.
  std::vector<double> lg = ScoreLogitGrad(act.dist, y);
  const std::vector<double> kl = DivergenceLogitGradient(one_hot, act.dist, Divergence::kKL);
  for (int v = 0; v < vocab; ++v) lg[v] += lambda * kl[v];
  GradientVector direct = BackpropLogitGrad(params, triple, act, lg);
  if (options.direct_gradient_hook) options.direct_gradient_hook(direct);

  GradientVector scaled = TokenLevelGaGradient(params, triple, position, y);
  scaled.Scale(1.0 - lambda);

  std::vector<double> row(vocab);
  for (int v = 0; v < vocab; ++v) {
    row[v] = (v == y ? 1.0 : 0.0) - lambda * one_hot.probs[v];
    if (v != y) {
      report.max_off_target_coefficient =
          std::max(report.max_off_target_coefficient, std::abs(row[v]));
    }
  }
  report.coefficients.push_back(std::move(row));
  report.max_discrepancy = direct.MaxAbsDiff(scaled);
  report.pass = report.max_discrepancy < report.tolerance &&
                report.max_off_target_coefficient == 0.0;
  return report;
}

std::string ReweightReportToJson(const ReweightReport& report) {
  nlohmann::ordered_json j;
  j["identity"] = report.identity;
  j["triple_id"] = report.triple_id;
  j["lambda"] = report.lambda;
  j["position"] = report.position;
  j["max_discrepancy"] = report.max_discrepancy;
  j["max_off_target_coefficient"] = report.max_off_target_coefficient;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
  j["coefficients"] = report.coefficients;
  return j.dump(2);
}

}  // namespace unlearnlab
