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

// Normal/key token classification from reference entropies, and numerical
// verification of the token-level gradient reweighting identity
//
//   grad ViKeR = sum_i sum_v (1{v = y_i} - lambda R_i(v)) grad log p(v | i)
//
// for the KL regularizer.

#ifndef UNLEARNLAB_TOKEN_ANALYSIS_H_
#define UNLEARNLAB_TOKEN_ANALYSIS_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "unlearnlab/model.h"
#include "unlearnlab/reference.h"

namespace unlearnlab {

// Shannon entropy in nats with 0 log 0 = 0.
double Entropy(const TokenDistribution& dist);

// H_b(tau) + (1 - tau) ln(vocab_size - 1): the largest entropy a distribution
// over vocab_size tokens can have when one token holds mass >= tau.
double EntropyUpperBound(double tau, int vocab_size);

struct TokenClassification {
  int position = 0;  // 1-based
  TokenId token = 0;
  double entropy = 0.0;
  double reference_prob = 0.0;  // R_i(y_i)
  bool is_normal = false;       // R_i(y_i) >= tau
  bool is_key = false;          // H(R_i) >= epsilon
};

inline constexpr double kDefaultNormalTau = 0.9;

std::vector<TokenClassification> ClassifyTokens(const ReferenceDistributions& refs,
                                                const TokenSeq& answer, double tau,
                                                double epsilon);
// epsilon defaults to the median per-position entropy of this answer.
std::vector<TokenClassification> ClassifyTokens(const ReferenceDistributions& refs,
                                                const TokenSeq& answer,
                                                double tau = kDefaultNormalTau);
double MedianEntropy(const ReferenceDistributions& refs);

// Positions flagged both normal and key.
int CountOverlap(const std::vector<TokenClassification>& classes);

// grad_theta log p_theta(v | I, x, y_{<i}) at 1-based position i.
GradientVector TokenLevelGaGradient(const ModelParams& params, const Triple& triple,
                                    int position, TokenId token);

struct ReweightReport {
  std::string identity;  // "reweighted_gradient" or "normal_token_scaling"
  TripleId triple_id = 0;
  double lambda = 0.0;
  int position = 0;  // 0 = all positions
  // coefficients[i][v] = 1{v = y_i} - lambda R_i(v), one row per position.
  std::vector<std::vector<double>> coefficients;
  double max_discrepancy = 0.0;
  // Largest |coefficient| at v != y_i; zero for one-hot references.
  double max_off_target_coefficient = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::optional<double> tolerance;
  // Applied to the directly differentiated gradient before comparison.
  // Used to exercise failure reporting.
  std::function<void(GradientVector&)> direct_gradient_hook;
};

inline constexpr double kReweightTolerance = 1e-8;
inline constexpr double kNormalScalingTolerance = 1e-10;

// Compares the backpropagated gradient of the single-triple KL ViKeR loss
// with the coefficient-weighted sum of token-level GA gradients.
ReweightReport VerifyReweightedGradient(const ModelParams& params, const Triple& triple,
                                        const ReferenceDistributions& refs, double lambda,
                                        const VerifyOptions& options = {});

// With the one-hot reference at y_i, the ViKeR gradient contributed by
// position i equals (1 - lambda) times the GA token-level gradient.
ReweightReport VerifyNormalTokenScaling(const ModelParams& params, const Triple& triple,
                                        int position, double lambda,
                                        const VerifyOptions& options = {});

std::string ReweightReportToJson(const ReweightReport& report);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_TOKEN_ANALYSIS_H_
