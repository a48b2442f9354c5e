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

#include "unlearnlab/losses.h"

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kGA: return "ga";
    case Method::kNPO: return "npo";
    case Method::kIdkPO: return "idkpo";
    case Method::kViKeR: return "viker";
  }
  return "ga";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kGA, Method::kNPO, Method::kIdkPO, Method::kViKeR}) {
    if (MethodName(m) == name) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

std::string_view DivergenceName(Divergence d) {
  switch (d) {
    case Divergence::kKL: return "kl";
    case Divergence::kJSD: return "jsd";
    case Divergence::kCoS: return "cos";
  }
  return "kl";
}

Divergence ParseDivergence(std::string_view name) {
  for (Divergence d : {Divergence::kKL, Divergence::kJSD, Divergence::kCoS}) {
    if (DivergenceName(d) == name) return d;
  }
  throw ValidationError("unknown regularizer '" + std::string(name) + "'");
}

void UnlearnConfig::Validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be a finite value >= 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be > 0");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (steps < 0) throw ValidationError("steps must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (batch_size < 0) throw ValidationError("batch_size must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("adam moment decays must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be > 0");
}

std::string UnlearnConfig::ToText() const {
  text::KeyValues kv;
  kv["method"] = MethodName(method);
  kv["lambda"] = text::FormatDouble(lambda);
  kv["k"] = std::to_string(k);
  kv["beta"] = text::FormatDouble(beta);
  kv["regularizer"] = DivergenceName(regularizer);
  kv["reference_category"] = ReferenceCategoryName(reference_category);
  kv["steps"] = std::to_string(steps);
  kv["learning_rate"] = text::FormatDouble(learning_rate);
  kv["adam_beta1"] = text::FormatDouble(adam_beta1);
  kv["adam_beta2"] = text::FormatDouble(adam_beta2);
  kv["adam_epsilon"] = text::FormatDouble(adam_epsilon);
  kv["weight_decay"] = text::FormatDouble(weight_decay);
  kv["batch_size"] = std::to_string(batch_size);
  kv["seed"] = std::to_string(seed);
  return "# unlearnlab unlearn config v1\n" + text::FormatKeyValues(kv);
}

UnlearnConfig UnlearnConfig::FromText(std::string_view text_doc) {
  UnlearnConfig c;
  for (const auto& [key, value] : text::ParseKeyValues(text_doc)) {
    if (key == "method") c.method = ParseMethod(value);
    else if (key == "lambda") c.lambda = text::ParseDouble(value);
    else if (key == "k") c.k = static_cast<int>(text::ParseInt(value));
    else if (key == "beta") c.beta = text::ParseDouble(value);
    else if (key == "regularizer") c.regularizer = ParseDivergence(value);
    else if (key == "reference_category") c.reference_category = ParseReferenceCategory(value);
    else if (key == "steps") c.steps = static_cast<int>(text::ParseInt(value));
    else if (key == "learning_rate") c.learning_rate = text::ParseDouble(value);
    else if (key == "adam_beta1") c.adam_beta1 = text::ParseDouble(value);
    else if (key == "adam_beta2") c.adam_beta2 = text::ParseDouble(value);
    else if (key == "adam_epsilon") c.adam_epsilon = text::ParseDouble(value);
    else if (key == "weight_decay") c.weight_decay = text::ParseDouble(value);
    else if (key == "batch_size") c.batch_size = static_cast<int>(text::ParseInt(value));
    else if (key == "seed") c.seed = text::ParseUint(value);
    else throw ParseError("unknown unlearn config key '" + key + "'");
  }
  c.Validate();
  return c;
}

void IdkPool::Validate(const ModelConfig& config) const {
  if (responses.empty()) throw ValidationError("IdkPO response pool is empty");
  for (const TokenSeq& r : responses) {
    if (r.empty() || r.back() != config.end_token()) {
      throw ValidationError("every refusal response must end with the end token");
    }
    if (static_cast<int>(r.size()) > config.max_positions) {
      throw ValidationError("refusal response longer than max_positions");
    }
    for (TokenId t : r) {
      if (t < 0 || t >= config.vocab_size) {
        throw ValidationError("refusal response token outside vocabulary");
      }
    }
  }
}

double LogSigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double KlDivergence(std::span<const double> r, std::span<const double> log_r,
                    std::span<const double> log_q) {
  double sum = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v) {
    if (r[v] > 0.0) sum += r[v] * (log_r[v] - log_q[v]);
  }
  return sum;
}

double JsDivergence(const TokenDistribution& r, const TokenDistribution& q) {
  double sum = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v) {
    const double m = 0.5 * (r.probs[v] + q.probs[v]);
    const double log_m = std::log(m);
    if (r.probs[v] > 0.0) sum += 0.5 * r.probs[v] * (r.log_probs[v] - log_m);
    if (q.probs[v] > 0.0) sum += 0.5 * q.probs[v] * (q.log_probs[v] - log_m);
  }
  return sum;
}

struct CosineParts {
  double dot = 0.0;
  double norm_r = 0.0;
  double norm_q = 0.0;
};

CosineParts Cosine(const TokenDistribution& r, const TokenDistribution& q) {
  CosineParts c;
  double rr = 0.0;
  double qq = 0.0;
  for (std::size_t v = 0; v < r.size(); ++v) {
    c.dot += r.probs[v] * q.probs[v];
    rr += r.probs[v] * r.probs[v];
    qq += q.probs[v] * q.probs[v];
  }
  c.norm_r = std::sqrt(rr);
  c.norm_q = std::sqrt(qq);
  return c;
}

double DivergenceUnchecked(const TokenDistribution& r, const TokenDistribution& q,
                           Divergence kind) {
  switch (kind) {
    case Divergence::kKL:
      return KlDivergence(r.probs, r.log_probs, q.log_probs);
    case Divergence::kJSD:
      return JsDivergence(r, q);
    case Divergence::kCoS: {
      const CosineParts c = Cosine(r, q);
      return 1.0 - c.dot / (c.norm_r * c.norm_q);
    }
  }
  return 0.0;
}

// Chains dD/dQ through the softmax Jacobian: dD/dl_u = Q_u (g_u - <g, Q>).
std::vector<double> ThroughSoftmax(const std::vector<double>& d_q,
                                   const TokenDistribution& q) {
  double inner = 0.0;
  for (std::size_t v = 0; v < d_q.size(); ++v) inner += d_q[v] * q.probs[v];
  std::vector<double> out(d_q.size());
  for (std::size_t v = 0; v < d_q.size(); ++v) out[v] = q.probs[v] * (d_q[v] - inner);
  return out;
}

std::vector<double> DivergenceLogitGradientUnchecked(const TokenDistribution& r,
                                                     const TokenDistribution& q,
                                                     Divergence kind) {
  const std::size_t n = r.size();
  switch (kind) {
    case Divergence::kKL: {
      // d/dl of -sum_v R_v log Q_v.
      double r_mass = 0.0;
      for (double x : r.probs) r_mass += x;
      std::vector<double> out(n);
      for (std::size_t v = 0; v < n; ++v) out[v] = q.probs[v] * r_mass - r.probs[v];
      return out;
    }
    case Divergence::kJSD: {
      // dJSD/dQ_v = log(Q_v / M_v) / 2.
      std::vector<double> d_q(n);
      for (std::size_t v = 0; v < n; ++v) {
        if (q.probs[v] == 0.0) continue;
        const double m = 0.5 * (r.probs[v] + q.probs[v]);
        d_q[v] = 0.5 * (q.log_probs[v] - std::log(m));
      }
      return ThroughSoftmax(d_q, q);
    }
    case Divergence::kCoS: {
      const CosineParts c = Cosine(r, q);
      const double denom = c.norm_r * c.norm_q;
      const double q_scale = c.dot / (c.norm_r * c.norm_q * c.norm_q * c.norm_q);
      std::vector<double> d_q(n);
      for (std::size_t v = 0; v < n; ++v) {
        d_q[v] = -r.probs[v] / denom + q_scale * q.probs[v];
      }
      return ThroughSoftmax(d_q, q);
    }
  }
  return std::vector<double>(n, 0.0);
}

// Value and logit gradient in one pass; JSD evaluates log(M) once per entry.
DivergenceWithGradient DivergenceAndGradientUnchecked(const TokenDistribution& r,
                                                      const TokenDistribution& q,
                                                      Divergence kind) {
  if (kind != Divergence::kJSD) {
    return {DivergenceUnchecked(r, q, kind), DivergenceLogitGradientUnchecked(r, q, kind)};
  }
  const std::size_t n = r.size();
  DivergenceWithGradient out;
  std::vector<double> d_q(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const double log_m = std::log(0.5 * (r.probs[v] + q.probs[v]));
    if (r.probs[v] > 0.0) out.value += 0.5 * r.probs[v] * (r.log_probs[v] - log_m);
    if (q.probs[v] > 0.0) {
      const double half_log_ratio = 0.5 * (q.log_probs[v] - log_m);
      out.value += q.probs[v] * half_log_ratio;
      d_q[v] = half_log_ratio;
    }
  }
  out.logit_gradient = ThroughSoftmax(d_q, q);
  return out;
}

void CheckPair(const TokenDistribution& r, const TokenDistribution& q) {
  if (r.size() != q.size()) throw ValidationError("divergence inputs differ in size");
  r.ValidateSimplex(1e-9);
  q.ValidateSimplex(1e-9);
}

// Per-position d loss / d logits for a teacher-forced sequence, scaled.
void AddLogProbGradient(const std::vector<PositionActivations>& acts,
                        std::span<const TokenId> answer, double scale,
                        std::vector<std::vector<double>>& logit_grads) {
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const auto& p = acts[i].dist.probs;
    auto& g = logit_grads[i];
    for (std::size_t v = 0; v < p.size(); ++v) g[v] -= scale * p[v];
    g[answer[i]] += scale;
  }
}

double SumLogProb(const std::vector<PositionActivations>& acts,
                  std::span<const TokenId> answer) {
  double s = 0.0;
  for (std::size_t i = 0; i < acts.size(); ++i) s += acts[i].dist.log_probs[answer[i]];
  return s;
}

class LossEngine {
 public:
  LossEngine(const ModelParams& params, std::span<const Triple> data, bool want_grad)
      : params_(params), data_(data), want_grad_(want_grad) {
    if (data.empty()) throw ValidationError("loss over an empty dataset");
    for (const Triple& t : data) ValidateTriple(params.config, t);
    if (want_grad_) grad_ = GradientVector(params.config);
  }

  void Add(double weight, const LossSpec& spec) {
    std::visit([&](const auto& s) { AddTerm(weight, s); }, spec);
  }

  LossAndGradient Finish() {
    if (!std::isfinite(value_)) {
      throw NonFiniteLossError("loss evaluated to a non-finite value");
    }
    return LossAndGradient{value_, std::move(grad_)};
  }

 private:
  double inv_n() const { return 1.0 / static_cast<double>(data_.size()); }

  std::vector<std::vector<double>> ZeroLogitGrads(std::size_t positions) const {
    return std::vector<std::vector<double>>(
        positions, std::vector<double>(params_.config.vocab_size, 0.0));
  }

  void Backprop(const Triple& t, const std::vector<PositionActivations>& acts,
                const std::vector<std::vector<double>>& logit_grads) {
    for (std::size_t i = 0; i < acts.size(); ++i) {
      BackwardPosition(params_, t.image, acts[i], logit_grads[i], grad_);
    }
  }

  void AddSignedNll(double weight) {
    for (const Triple& t : data_) {
      const auto acts = ForwardAnswer(params_, t.image, t.question, t.answer);
      value_ += weight * inv_n() * SumLogProb(acts, t.answer);
      if (!want_grad_) continue;
      auto lg = ZeroLogitGrads(acts.size());
      AddLogProbGradient(acts, t.answer, weight * inv_n(), lg);
      Backprop(t, acts, lg);
    }
  }

  void AddTerm(double weight, const NllObjective&) { AddSignedNll(-weight); }
  void AddTerm(double weight, const GaObjective&) { AddSignedNll(weight); }

  void AddTerm(double weight, const VikerObjective& s) {
    if (s.references == nullptr) throw ValidationError("ViKeR loss needs references");
    if (!(s.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    for (const Triple& t : data_) {
      const auto it = s.references->find(t.id);
      if (it == s.references->end()) {
        throw ValidationError("missing reference distributions for triple " +
                              std::to_string(t.id));
      }
      const ReferenceDistributions& refs = it->second;
      if (refs.size() != t.answer.size()) {
        throw ValidationError("reference length differs from answer length for triple " +
                              std::to_string(t.id));
      }
      const auto acts = ForwardAnswer(params_, t.image, t.question, t.answer);
      auto lg = ZeroLogitGrads(want_grad_ ? acts.size() : 0);
      if (s.include_ga_term) {
        value_ += weight * inv_n() * SumLogProb(acts, t.answer);
        if (want_grad_) AddLogProbGradient(acts, t.answer, weight * inv_n(), lg);
      }
      const double reg_scale = weight * s.lambda * inv_n();
      for (std::size_t i = 0; i < acts.size(); ++i) {
        const TokenDistribution& r = refs.at(i);
        const TokenDistribution& q = acts[i].dist;
        if (r.size() != q.size()) throw ValidationError("reference vocabulary mismatch");
        if (want_grad_ && reg_scale != 0.0) {
          const DivergenceWithGradient d = DivergenceAndGradientUnchecked(r, q, s.kind);
          value_ += reg_scale * d.value;
          for (std::size_t v = 0; v < d.logit_gradient.size(); ++v) {
            lg[i][v] += reg_scale * d.logit_gradient[v];
          }
        } else {
          value_ += reg_scale * DivergenceUnchecked(r, q, s.kind);
        }
      }
      if (want_grad_) Backprop(t, acts, lg);
    }
  }

  void AddTerm(double weight, const NpoObjective& s) {
    if (s.params_full == nullptr) throw ValidationError("NPO loss needs the full model");
    if (!(s.beta > 0.0)) throw ValidationError("beta must be > 0");
    for (const Triple& t : data_) {
      const auto acts = ForwardAnswer(params_, t.image, t.question, t.answer);
      const double ratio = SumLogProb(acts, t.answer) -
                           SequenceLogProb(*s.params_full, t.image, t.question, t.answer);
      value_ += weight * inv_n() * (-2.0 / s.beta) * LogSigmoid(-s.beta * ratio);
      if (!want_grad_) continue;
      // d/d ratio of -(2/beta) log sigmoid(-beta r) = 2 sigmoid(beta r).
      const double d_ratio = weight * inv_n() * 2.0 * Sigmoid(s.beta * ratio);
      auto lg = ZeroLogitGrads(acts.size());
      AddLogProbGradient(acts, t.answer, d_ratio, lg);
      Backprop(t, acts, lg);
    }
  }

  void AddTerm(double weight, const IdkpoObjective& s) {
    if (s.params_full == nullptr || s.pool == nullptr) {
      throw ValidationError("IdkPO loss needs the full model and a refusal pool");
    }
    if (!(s.beta > 0.0)) throw ValidationError("beta must be > 0");
    s.pool->Validate(params_.config);
    for (const Triple& t : data_) {
      const auto it = s.assignment.find(t.id);
      if (it == s.assignment.end() || it->second >= s.pool->responses.size()) {
        throw ValidationError("no refusal response assigned to triple " +
                              std::to_string(t.id));
      }
      const TokenSeq& idk = s.pool->responses[it->second];
      const ModelParams& full = *s.params_full;
      const auto acts_y = ForwardAnswer(params_, t.image, t.question, t.answer);
      const auto acts_idk = ForwardAnswer(params_, t.image, t.question, idk);
      const double ratio_y = SumLogProb(acts_y, t.answer) -
                             SequenceLogProb(full, t.image, t.question, t.answer);
      const double ratio_idk = SumLogProb(acts_idk, idk) -
                               SequenceLogProb(full, t.image, t.question, idk);
      const double u = s.beta * (ratio_idk - ratio_y);
      value_ += weight * inv_n() * (-1.0 / s.beta) * LogSigmoid(u);
      if (!want_grad_) continue;
      // d/du of -(1/beta) log sigmoid(u) = -(1/beta) sigmoid(-u); du/dr = +-beta.
      const double d_ratio_idk = -weight * inv_n() * Sigmoid(-u);
      auto lg_y = ZeroLogitGrads(acts_y.size());
      auto lg_idk = ZeroLogitGrads(acts_idk.size());
      AddLogProbGradient(acts_idk, idk, d_ratio_idk, lg_idk);
      AddLogProbGradient(acts_y, t.answer, -d_ratio_idk, lg_y);
      Backprop(t, acts_y, lg_y);
      Backprop(t, acts_idk, lg_idk);
    }
  }

  const ModelParams& params_;
  std::span<const Triple> data_;
  bool want_grad_;
  double value_ = 0.0;
  GradientVector grad_;
};

}  // namespace

double ComputeDivergence(const TokenDistribution& r, const TokenDistribution& q,
                         Divergence kind) {
  CheckPair(r, q);
  return DivergenceUnchecked(r, q, kind);
}

std::vector<double> DivergenceLogitGradient(const TokenDistribution& r,
                                            const TokenDistribution& q,
                                            Divergence kind) {
  CheckPair(r, q);
  return DivergenceLogitGradientUnchecked(r, q, kind);
}

DivergenceWithGradient DivergenceAndLogitGradient(const TokenDistribution& r,
                                                  const TokenDistribution& q,
                                                  Divergence kind) {
  CheckPair(r, q);
  return DivergenceAndGradientUnchecked(r, q, kind);
}

double LossValue(const ModelParams& params, const LossSpec& spec,
                 std::span<const Triple> data) {
  LossEngine engine(params, data, /*want_grad=*/false);
  engine.Add(1.0, spec);
  return engine.Finish().value;
}

GradientVector LossGradient(const ModelParams& params, const LossSpec& spec,
                            std::span<const Triple> data) {
  return ComputeLossAndGradient(params, spec, data).gradient;
}

LossAndGradient ComputeLossAndGradient(const ModelParams& params, const LossSpec& spec,
                                       std::span<const Triple> data) {
  LossEngine engine(params, data, /*want_grad=*/true);
  engine.Add(1.0, spec);
  return engine.Finish();
}

LossAndGradient ComputeLossAndGradient(const ModelParams& params,
                                       std::span<const WeightedLoss> terms,
                                       std::span<const Triple> data) {
  LossEngine engine(params, data, /*want_grad=*/true);
  for (const WeightedLoss& t : terms) engine.Add(t.weight, t.spec);
  return engine.Finish();
}

double GaLoss(const ModelParams& params, std::span<const Triple> forget_set) {
  return LossValue(params, GaObjective{}, forget_set);
}

double VikerLoss(const ModelParams& params, std::span<const Triple> forget_set,
                 const ReferenceMap& references, double lambda, Divergence kind) {
  return LossValue(params, VikerObjective{&references, lambda, kind, true}, forget_set);
}

double NpoLoss(const ModelParams& params, const ModelParams& params_full,
               std::span<const Triple> forget_set, double beta) {
  return LossValue(params, NpoObjective{&params_full, beta}, forget_set);
}

double IdkpoLoss(const ModelParams& params, const ModelParams& params_full,
                 std::span<const Triple> forget_set, const IdkPool& pool, double beta,
                 std::uint64_t seed) {
  IdkpoObjective spec;
  spec.params_full = &params_full;
  spec.pool = &pool;
  spec.assignment = AssignIdkResponses(forget_set, pool, seed);
  spec.beta = beta;
  return LossValue(params, spec, forget_set);
}

std::map<TripleId, std::size_t> AssignIdkResponses(std::span<const Triple> forget_set,
                                                   const IdkPool& pool,
                                                   std::uint64_t seed) {
  if (pool.responses.empty()) throw ValidationError("IdkPO response pool is empty");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.responses.size() - 1);
  std::map<TripleId, std::size_t> out;
  for (const Triple& t : forget_set) out[t.id] = pick(rng);
  return out;
}

}  // namespace unlearnlab
