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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle/oracle.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/losses.h"

namespace unlearnlab {
namespace {

// Largest-entropy distribution on `vocab` tokens whose top probability is tau.
TokenDistribution PeakedUniform(int vocab, double tau) {
  std::vector<double> p(vocab, (1.0 - tau) / (vocab - 1));
  p[0] = tau;
  return TokenDistribution::FromProbs(p);
}

TEST(EntropyTest, UniformAndOneHot) {
  EXPECT_NEAR(Entropy(TokenDistribution::FromProbs({.25, .25, .25, .25})), std::log(4.0),
              1e-15);
  EXPECT_EQ(Entropy(TokenDistribution::OneHot(64, 5)), 0.0);
  EXPECT_FALSE(std::signbit(Entropy(TokenDistribution::OneHot(64, 5))));
  EXPECT_THROW(Entropy(TokenDistribution::FromProbs({0.3, 0.3})), SimplexViolation);
}

TEST(EntropyTest, RandomDistributionsAreWithinZeroAndLogV) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> logits(16);
    for (double& l : logits) l = g(rng);
    const double h = Entropy(TokenDistribution::FromLogits(logits));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(16.0) + 1e-12);
  }
}

TEST(EntropyUpperBoundTest, AttainedByPeakedUniform) {
  for (double tau : {0.99, 0.999, 0.9999}) {
    const double bound = EntropyUpperBound(tau, 64);
    EXPECT_NEAR(Entropy(PeakedUniform(64, tau)), bound, 1e-13);
    std::mt19937_64 rng(static_cast<std::uint64_t>(tau * 1e4));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> rest(63);
      double s = 0.0;
      for (double& x : rest) s += (x = u(rng));
      std::vector<double> p = {tau};
      for (double x : rest) p.push_back((1.0 - tau) * x / s);
      EXPECT_LE(Entropy(TokenDistribution::FromProbs(p)), bound + 1e-13);
    }
  }
  EXPECT_LE(EntropyUpperBound(0.999, 64), 0.013);
  EXPECT_EQ(EntropyUpperBound(1.0, 64), 0.0);
  EXPECT_THROW(EntropyUpperBound(0.0, 64), ValidationError);
}

ReferenceDistributions ThreePositionRefs() {
  // Position 1 nearly one-hot, position 2 uniform, position 3 one-hot.
  return ReferenceDistributions(
      1,
      {TokenDistribution::FromProbs({0.95, 0.02, 0.02, 0.01}),
       TokenDistribution::FromProbs({0.25, 0.25, 0.25, 0.25}),
       TokenDistribution::OneHot(4, 3)},
      5);
}

TEST(ClassifyTokensTest, NormalAndKeyFlags) {
  const ReferenceDistributions refs = ThreePositionRefs();
  const auto c = ClassifyTokens(refs, {0, 2, 3}, 0.9, 0.5);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_TRUE(c[0].is_normal);
  EXPECT_FALSE(c[0].is_key);
  EXPECT_FALSE(c[1].is_normal);
  EXPECT_TRUE(c[1].is_key);
  EXPECT_NEAR(c[1].reference_prob, 0.25, 1e-15);
  EXPECT_TRUE(c[2].is_normal);
  EXPECT_EQ(c[2].position, 3);
  EXPECT_EQ(CountOverlap(c), 0);
  // The median entropy is the middle position's, and the default epsilon
  // marks it and everything above as key.
  EXPECT_NEAR(MedianEntropy(refs), c[0].entropy, 1e-15);
  const auto by_median = ClassifyTokens(refs, {0, 2, 3});
  EXPECT_TRUE(by_median[0].is_key);
  EXPECT_TRUE(by_median[1].is_key);
  EXPECT_FALSE(by_median[2].is_key);
  EXPECT_EQ(CountOverlap(by_median), 1);
}

TEST(ClassifyTokensTest, RejectsBadInputs) {
  const ReferenceDistributions refs = ThreePositionRefs();
  EXPECT_THROW(ClassifyTokens(refs, {0, 1}, 0.9), ValidationError);
  EXPECT_THROW(ClassifyTokens(refs, {0, 1, 9}, 0.9), ValidationError);
  EXPECT_THROW(ClassifyTokens(refs, {0, 1, 2}, 0.0), ValidationError);
  EXPECT_THROW(ClassifyTokens(refs, {0, 1, 2}, 0.9, 0.0), ValidationError);
}

TEST(ClassifyTokensTest, HighEntropyTokensAreNeverNormalAboveBound) {
  // H(R) > bound(tau) implies max R < tau, so no token can be normal.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  const double tau = 0.9;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(8);
    for (double& l : logits) l = g(rng);
    const auto d = TokenDistribution::FromLogits(logits);
    ReferenceDistributions refs(1, {d}, 1);
    for (TokenId y = 0; y < 8; ++y) {
      const auto c = ClassifyTokens(refs, {y}, tau, EntropyUpperBound(tau, 8) + 1e-12);
      EXPECT_FALSE(c[0].is_normal && c[0].is_key);
    }
  }
}

class ReweightTest : public ::testing::Test {
 protected:
  void SetUp() override {
    inst_ = oracle::RandomInstance(11, 8, 6);
    refs_ = EstimateReferences(
        inst_.full, ReferenceSet{inst_.reference_images, ReferenceCategory::kPeople},
        inst_.data);
  }
  oracle::Instance inst_;
  ReferenceMap refs_;
};

TEST_F(ReweightTest, CoefficientsOfOneHotReference) {
  const Triple& t = inst_.data[0];
  std::vector<TokenDistribution> rows;
  for (std::size_t i = 0; i < t.answer.size(); ++i) {
    rows.push_back(TokenDistribution::OneHot(8, i == 0 ? (t.answer[0] + 1) % 7 : t.answer[i]));
  }
  const ReferenceDistributions refs(t.id, rows, 1);
  const ReweightReport r = VerifyReweightedGradient(inst_.theta, t, refs, 0.1);
  EXPECT_TRUE(r.pass) << r.max_discrepancy;
  EXPECT_DOUBLE_EQ(r.coefficients[0][t.answer[0]], 1.0);
  EXPECT_DOUBLE_EQ(r.coefficients[0][(t.answer[0] + 1) % 7], -0.1);
  if (t.answer.size() > 1) EXPECT_DOUBLE_EQ(r.coefficients[1][t.answer[1]], 0.9);
  EXPECT_NEAR(r.max_off_target_coefficient, 0.1, 1e-15);
}

TEST_F(ReweightTest, ReassembledGradientMatchesDirectOne) {
  for (double lambda : {0.0, 0.3, 0.5, 1.0, 2.5}) {
    for (const Triple& t : inst_.data) {
      const ReweightReport r = VerifyReweightedGradient(inst_.theta, t, refs_.at(t.id), lambda);
      EXPECT_TRUE(r.pass) << "lambda " << lambda << " discrepancy " << r.max_discrepancy;
      EXPECT_LT(r.max_discrepancy, 1e-8);
      ASSERT_EQ(r.coefficients.size(), t.answer.size());
      for (std::size_t i = 0; i < t.answer.size(); ++i) {
        double sum = 0.0;
        for (double c : r.coefficients[i]) sum += c;
        EXPECT_NEAR(sum, 1.0 - lambda, 1e-12);
      }
    }
  }
}

TEST_F(ReweightTest, ScoreVectorsSumToZeroWeightedByModel) {
  // sum_v Q(v) d log Q(v) = 0, so equal coefficients cancel.
  const Triple& t = inst_.data[1];
  const TokenDistribution q = ForwardTokenDist(inst_.theta, t.image, t.question, {}, 1);
  GradientVector total(inst_.theta.config);
  for (TokenId v = 0; v < 8; ++v) {
    total.AddScaled(TokenLevelGaGradient(inst_.theta, t, 1, v), q.probs[v]);
  }
  EXPECT_LT(total.MaxAbs(), 1e-14);
}

TEST_F(ReweightTest, NormalTokenScaling) {
  for (const Triple& t : inst_.data) {
    for (int pos = 1; pos <= static_cast<int>(t.answer.size()); ++pos) {
      for (double lambda : {0.0, 0.5, 1.0}) {
        const ReweightReport r = VerifyNormalTokenScaling(inst_.theta, t, pos, lambda);
        EXPECT_TRUE(r.pass) << r.max_discrepancy;
        EXPECT_LT(r.max_discrepancy, 1e-10);
        EXPECT_EQ(r.max_off_target_coefficient, 0.0);
      }
    }
  }
}

TEST_F(ReweightTest, LambdaOneCancelsNormalTokenGradient) {
  const Triple& t = inst_.data[0];
  const ReferenceDistributions refs(
      t.id, [&] {
        std::vector<TokenDistribution> rows;
        for (TokenId y : t.answer) rows.push_back(TokenDistribution::OneHot(8, y));
        return rows;
      }(),
      1);
  ReferenceMap single;
  single.emplace(t.id, refs);
  const Triple one[] = {t};
  const GradientVector g =
      LossGradient(inst_.theta, VikerObjective{&single, 1.0, Divergence::kKL, true}, one);
  EXPECT_LT(g.MaxAbs(), 1e-12);
}

TEST_F(ReweightTest, HookMakesVerificationFail) {
  VerifyOptions opts;
  opts.direct_gradient_hook = [](GradientVector& g) { g.b[0] += 1e-3; };
  const Triple& t = inst_.data[0];
  EXPECT_FALSE(VerifyReweightedGradient(inst_.theta, t, refs_.at(t.id), 0.5, opts).pass);
  EXPECT_FALSE(VerifyNormalTokenScaling(inst_.theta, t, 1, 0.5, opts).pass);
}

TEST_F(ReweightTest, JsonReportHasAllFields) {
  const Triple& t = inst_.data[0];
  const std::string json =
      ReweightReportToJson(VerifyNormalTokenScaling(inst_.theta, t, 1, 0.5));
  for (const char* key : {"identity", "triple_id", "lambda", "max_discrepancy", "tolerance",
                          "pass", "coefficients"}) {
    EXPECT_NE(json.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
}

TEST_F(ReweightTest, PositionOutsideAnswerIsRejected) {
  const Triple& t = inst_.data[0];
  EXPECT_THROW(TokenLevelGaGradient(inst_.theta, t, 0, 1), ValidationError);
  EXPECT_THROW(VerifyNormalTokenScaling(inst_.theta, t, int(t.answer.size()) + 1, 0.5),
               ValidationError);
}

}  // namespace
}  // namespace unlearnlab
