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

#include "unlearnlab/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "unlearnlab/errors.h"

namespace unlearnlab {

void ModelConfig::Validate() const {
  if (vocab_size < 1 || img_dim < 1 || hidden_dim < 1 || max_positions < 1) {
    throw ValidationError("model config fields must all be >= 1");
  }
}

ParamTensors::ParamTensors(const ModelConfig& c)
    : E(c.vocab_size, c.hidden_dim),
      P(c.hidden_dim, c.img_dim),
      U(c.max_positions, c.hidden_dim),
      A(c.hidden_dim, c.hidden_dim),
      O(c.vocab_size, c.hidden_dim),
      b(c.hidden_dim, 0.0) {}

std::size_t ParamTensors::NumValues() const {
  std::size_t n = 0;
  ForEach([&](std::string_view, std::span<const double> v) { n += v.size(); });
  return n;
}

std::vector<double> ParamTensors::Flatten() const {
  std::vector<double> out;
  out.reserve(NumValues());
  ForEach([&](std::string_view, std::span<const double> v) {
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

double& ParamTensors::At(std::size_t flat_index) {
  double* found = nullptr;
  ForEach([&](std::string_view, std::span<double> v) {
    if (found == nullptr) {
      if (flat_index < v.size()) {
        found = &v[flat_index];
      } else {
        flat_index -= v.size();
      }
    }
  });
  if (found == nullptr) throw ValidationError("flat parameter index out of range");
  return *found;
}

void GradientVector::AddScaled(const GradientVector& other, double scale) {
  std::vector<std::span<const double>> src;
  other.ForEach([&](std::string_view, std::span<const double> v) { src.push_back(v); });
  std::size_t t = 0;
  ForEach([&](std::string_view, std::span<double> v) {
    if (src[t].size() != v.size()) throw ValidationError("gradient shape mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += scale * src[t][j];
    ++t;
  });
}

void GradientVector::Scale(double factor) {
  ForEach([&](std::string_view, std::span<double> v) {
    for (double& x : v) x *= factor;
  });
}

double GradientVector::MaxAbsDiff(const GradientVector& other) const {
  const std::vector<double> a = Flatten();
  const std::vector<double> b2 = other.Flatten();
  if (a.size() != b2.size()) throw ValidationError("gradient shape mismatch");
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, std::abs(a[j] - b2[j]));
  }
  return worst;
}

double GradientVector::MaxAbs() const {
  double worst = 0.0;
  ForEach([&](std::string_view, std::span<const double> v) {
    for (double x : v) worst = std::max(worst, std::abs(x));
  });
  return worst;
}

std::string_view ImageCategoryName(ImageCategory category) {
  switch (category) {
    case ImageCategory::kPersona: return "persona";
    case ImageCategory::kPeople: return "people";
    case ImageCategory::kPets: return "pets";
    case ImageCategory::kScene: return "scene";
    case ImageCategory::kPattern: return "pattern";
  }
  return "persona";
}

ImageCategory ParseImageCategory(std::string_view name) {
  for (ImageCategory c : {ImageCategory::kPersona, ImageCategory::kPeople,
                          ImageCategory::kPets, ImageCategory::kScene,
                          ImageCategory::kPattern}) {
    if (ImageCategoryName(c) == name) return c;
  }
  throw ParseError("unknown image category '" + std::string(name) + "'");
}

TokenDistribution TokenDistribution::FromLogits(std::span<const double> logits) {
  TokenDistribution d;
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max_logit);
  const double log_norm = max_logit + std::log(sum);
  d.log_probs.resize(logits.size());
  d.probs.resize(logits.size());
  for (std::size_t v = 0; v < logits.size(); ++v) {
    d.log_probs[v] = logits[v] - log_norm;
    d.probs[v] = std::exp(d.log_probs[v]);
  }
  return d;
}

TokenDistribution TokenDistribution::FromProbs(std::vector<double> probs) {
  TokenDistribution d;
  d.log_probs.resize(probs.size());
  for (std::size_t v = 0; v < probs.size(); ++v) {
    d.log_probs[v] = probs[v] > 0.0 ? std::log(probs[v])
                                    : -std::numeric_limits<double>::infinity();
  }
  d.probs = std::move(probs);
  return d;
}

TokenDistribution TokenDistribution::OneHot(int vocab_size, TokenId token) {
  if (token < 0 || token >= vocab_size) throw ValidationError("one-hot token out of range");
  std::vector<double> p(vocab_size, 0.0);
  p[token] = 1.0;
  return FromProbs(std::move(p));
}

void TokenDistribution::ValidateSimplex(double tolerance) const {
  if (probs.empty() || probs.size() != log_probs.size()) {
    throw SimplexViolation("distribution is empty or has mismatched fields");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw SimplexViolation("distribution has a negative or non-finite entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw SimplexViolation("distribution sums to " + std::to_string(sum));
  }
}

ModelParams InitParams(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  ModelParams params(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  params.ForEach([&](std::string_view, std::span<double> v) {
    for (double& x : v) x = uniform(rng);
  });
  return params;
}

PositionActivations ForwardPosition(const ModelParams& params,
                                    const ImageFeature& image,
                                    std::span<const TokenId> question,
                                    std::span<const TokenId> prefix,
                                    int position) {
  const ModelConfig& c = params.config;
  const std::size_t hidden = c.hidden_dim;
  PositionActivations act;
  act.position = position;
  act.context.reserve(question.size() + prefix.size());
  act.context.insert(act.context.end(), question.begin(), question.end());
  act.context.insert(act.context.end(), prefix.begin(), prefix.end());

  act.mean_embedding.assign(hidden, 0.0);
  for (TokenId t : act.context) {
    const auto row = params.E.row(t);
    for (std::size_t j = 0; j < hidden; ++j) act.mean_embedding[j] += row[j];
  }
  const double inv_count = 1.0 / static_cast<double>(act.context.size());
  for (double& x : act.mean_embedding) x *= inv_count;

  act.hidden.assign(hidden, 0.0);
  const auto pos_row = params.U.row(position - 1);
  for (std::size_t r = 0; r < hidden; ++r) {
    double pre = params.b[r] + pos_row[r];
    const auto p_row = params.P.row(r);
    for (std::size_t j = 0; j < image.z.size(); ++j) pre += p_row[j] * image.z[j];
    const auto a_row = params.A.row(r);
    for (std::size_t j = 0; j < hidden; ++j) pre += a_row[j] * act.mean_embedding[j];
    act.hidden[r] = std::tanh(pre);
  }

  std::vector<double> logits(c.vocab_size, 0.0);
  for (int v = 0; v < c.vocab_size; ++v) {
    const auto o_row = params.O.row(v);
    double l = 0.0;
    for (std::size_t j = 0; j < hidden; ++j) l += o_row[j] * act.hidden[j];
    logits[v] = l;
  }
  act.dist = TokenDistribution::FromLogits(logits);
  return act;
}

void BackwardPosition(const ModelParams& params, const ImageFeature& image,
                      const PositionActivations& act,
                      std::span<const double> logit_grad,
                      GradientVector& grad) {
  const std::size_t hidden = params.config.hidden_dim;
  std::vector<double> d_hidden(hidden, 0.0);
  for (std::size_t v = 0; v < logit_grad.size(); ++v) {
    const double g = logit_grad[v];
    if (g == 0.0) continue;
    auto go_row = grad.O.row(v);
    const auto o_row = params.O.row(v);
    for (std::size_t j = 0; j < hidden; ++j) {
      go_row[j] += g * act.hidden[j];
      d_hidden[j] += g * o_row[j];
    }
  }

  std::vector<double> d_pre(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    d_pre[r] = d_hidden[r] * (1.0 - act.hidden[r] * act.hidden[r]);
  }

  std::vector<double> d_mean(hidden, 0.0);
  auto gu_row = grad.U.row(act.position - 1);
  for (std::size_t r = 0; r < hidden; ++r) {
    const double d = d_pre[r];
    grad.b[r] += d;
    gu_row[r] += d;
    auto gp_row = grad.P.row(r);
    for (std::size_t j = 0; j < image.z.size(); ++j) gp_row[j] += d * image.z[j];
    auto ga_row = grad.A.row(r);
    const auto a_row = params.A.row(r);
    for (std::size_t j = 0; j < hidden; ++j) {
      ga_row[j] += d * act.mean_embedding[j];
      d_mean[j] += d * a_row[j];
    }
  }

  const double inv_count = 1.0 / static_cast<double>(act.context.size());
  for (TokenId t : act.context) {
    auto ge_row = grad.E.row(t);
    for (std::size_t j = 0; j < hidden; ++j) ge_row[j] += d_mean[j] * inv_count;
  }
}

namespace {

void CheckTokens(const ModelConfig& c, std::span<const TokenId> tokens,
                 const char* what) {
  for (TokenId t : tokens) {
    if (t < 0 || t >= c.vocab_size) {
      throw ValidationError(std::string(what) + " token id " + std::to_string(t) +
                            " outside vocabulary of size " +
                            std::to_string(c.vocab_size));
    }
  }
}

void CheckImage(const ModelConfig& c, const ImageFeature& image) {
  if (static_cast<int>(image.z.size()) != c.img_dim) {
    throw ValidationError("image feature has dimension " +
                          std::to_string(image.z.size()) + ", model expects " +
                          std::to_string(c.img_dim));
  }
}

}  // namespace

TokenDistribution ForwardTokenDist(const ModelParams& params,
                                   const ImageFeature& image,
                                   std::span<const TokenId> question,
                                   std::span<const TokenId> prefix,
                                   int position) {
  const ModelConfig& c = params.config;
  if (position < 1 || position > c.max_positions) {
    throw ValidationError("position " + std::to_string(position) +
                          " outside [1, " + std::to_string(c.max_positions) + "]");
  }
  if (static_cast<int>(prefix.size()) != position - 1) {
    throw ValidationError("prefix length must equal position - 1");
  }
  if (question.empty()) throw ValidationError("question must be non-empty");
  CheckTokens(c, question, "question");
  CheckTokens(c, prefix, "prefix");
  CheckImage(c, image);
  return ForwardPosition(params, image, question, prefix, position).dist;
}

std::vector<PositionActivations> ForwardAnswer(const ModelParams& params,
                                               const ImageFeature& image,
                                               std::span<const TokenId> question,
                                               std::span<const TokenId> answer) {
  std::vector<PositionActivations> out;
  out.reserve(answer.size());
  for (std::size_t i = 0; i < answer.size(); ++i) {
    out.push_back(ForwardPosition(params, image, question, answer.first(i),
                                  static_cast<int>(i) + 1));
  }
  return out;
}

void ValidateTriple(const ModelConfig& config, const Triple& triple) {
  if (triple.question.empty()) throw ValidationError("triple question is empty");
  if (triple.answer.empty()) throw ValidationError("triple answer is empty");
  if (static_cast<int>(triple.answer.size()) > config.max_positions) {
    throw ValidationError("answer of triple " + std::to_string(triple.id) +
                          " is longer than max_positions");
  }
  if (!triple.key_mask.empty() && triple.key_mask.size() != triple.answer.size()) {
    throw ValidationError("key_mask length differs from answer length");
  }
  CheckTokens(config, triple.question, "question");
  CheckTokens(config, triple.answer, "answer");
  CheckImage(config, triple.image);
}

double SequenceLogProb(const ModelParams& params, const ImageFeature& image,
                       std::span<const TokenId> question,
                       std::span<const TokenId> answer) {
  double total = 0.0;
  for (std::size_t i = 0; i < answer.size(); ++i) {
    const PositionActivations act = ForwardPosition(
        params, image, question, answer.first(i), static_cast<int>(i) + 1);
    total += act.dist.log_probs[answer[i]];
  }
  return total;
}

double AnswerLogProb(const ModelParams& params, const Triple& triple) {
  ValidateTriple(params.config, triple);
  return SequenceLogProb(params, triple.image, triple.question, triple.answer);
}

double NllLoss(const ModelParams& params, std::span<const Triple> data) {
  if (data.empty()) throw ValidationError("NLL loss of an empty dataset");
  double sum = 0.0;
  for (const Triple& t : data) sum += AnswerLogProb(params, t);
  return -sum / static_cast<double>(data.size());
}

TokenSeq GreedyDecode(const ModelParams& params, const ImageFeature& image,
                      std::span<const TokenId> question, int max_len) {
  const ModelConfig& c = params.config;
  if (max_len > c.max_positions) {
    throw ValidationError("max_len exceeds max_positions");
  }
  if (question.empty()) throw ValidationError("question must be non-empty");
  CheckTokens(c, question, "question");
  CheckImage(c, image);
  TokenSeq out;
  for (int i = 1; i <= max_len; ++i) {
    const PositionActivations act =
        ForwardPosition(params, image, question, out, i);
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const auto& lp = act.dist.log_probs;
    const TokenId token =
        static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    out.push_back(token);
    if (token == c.end_token()) break;
  }
  return out;
}

}  // namespace unlearnlab
