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

#include <gtest/gtest.h>

#include "oracle/oracle.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/gradient_check.h"

namespace unlearnlab {
namespace {

constexpr Divergence kAllDivergences[] = {Divergence::kKL, Divergence::kJSD,
                                          Divergence::kCoS};

TokenDistribution RandomDist(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> logits(n);
  for (double& l : logits) l = g(rng);
  return TokenDistribution::FromLogits(logits);
}

TEST(DivergenceTest, KnownKlValue) {
  const auto r = TokenDistribution::FromProbs({0.5, 0.5});
  const auto q = TokenDistribution::FromProbs({0.25, 0.75});
  EXPECT_NEAR(ComputeDivergence(r, q, Divergence::kKL), 0.143841036, 1e-9);
}

TEST(DivergenceTest, ZeroAtEqualityAndNonNegative) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const TokenDistribution r = RandomDist(6, rng);
    const TokenDistribution q = RandomDist(6, rng);
    for (Divergence d : kAllDivergences) {
      EXPECT_NEAR(ComputeDivergence(r, r, d), 0.0, 1e-14);
      EXPECT_GE(ComputeDivergence(r, q, d), -1e-15);
    }
  }
}

TEST(DivergenceTest, JsdIsSymmetricAndBounded) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const TokenDistribution r = RandomDist(5, rng);
    const TokenDistribution q = RandomDist(5, rng);
    const double a = ComputeDivergence(r, q, Divergence::kJSD);
    EXPECT_NEAR(a, ComputeDivergence(q, r, Divergence::kJSD), 1e-15);
    EXPECT_LE(a, std::log(2.0) + 1e-15);
  }
  const auto e0 = TokenDistribution::OneHot(3, 0);
  const auto e1 = TokenDistribution::OneHot(3, 1);
  EXPECT_NEAR(ComputeDivergence(e0, e1, Divergence::kJSD), std::log(2.0), 1e-15);
}

TEST(DivergenceTest, OneHotReferenceKlIsNegativeLogProb) {
  std::mt19937_64 rng(3);
  const TokenDistribution q = RandomDist(7, rng);
  const auto r = TokenDistribution::OneHot(7, 4);
  EXPECT_NEAR(ComputeDivergence(r, q, Divergence::kKL), -q.log_probs[4], 1e-13);
}

TEST(DivergenceTest, MatchesOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenDistribution r = RandomDist(8, rng);
    const TokenDistribution q = RandomDist(8, rng);
    const oracle::Dist ro(r.probs.begin(), r.probs.end());
    const oracle::Dist qo(q.probs.begin(), q.probs.end());
    for (Divergence d : kAllDivergences) {
      EXPECT_NEAR(ComputeDivergence(r, q, d),
                  static_cast<double>(oracle::Divergence(ro, qo, d)), 1e-13);
    }
  }
}

TEST(DivergenceTest, LogitGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.5);
  for (Divergence d : kAllDivergences) {
    std::vector<double> logits(6);
    for (double& l : logits) l = g(rng);
    const TokenDistribution r = RandomDist(6, rng);
    const std::vector<double> grad =
        DivergenceLogitGradient(r, TokenDistribution::FromLogits(logits), d);
    for (std::size_t u = 0; u < logits.size(); ++u) {
      std::vector<double> up = logits, down = logits;
      up[u] += 1e-6;
      down[u] -= 1e-6;
      const double fd = (ComputeDivergence(r, TokenDistribution::FromLogits(up), d) -
                         ComputeDivergence(r, TokenDistribution::FromLogits(down), d)) /
                        2e-6;
      EXPECT_NEAR(grad[u], fd, 1e-8) << DivergenceName(d) << " u=" << u;
    }
  }
}

TEST(DivergenceTest, FusedPassMatchesSeparateCalls) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenDistribution r =
        trial % 4 == 0 ? TokenDistribution::OneHot(9, trial % 9) : RandomDist(9, rng);
    const TokenDistribution q = RandomDist(9, rng);
    for (Divergence d : kAllDivergences) {
      const DivergenceWithGradient both = DivergenceAndLogitGradient(r, q, d);
      EXPECT_NEAR(both.value, ComputeDivergence(r, q, d), 1e-15);
      const std::vector<double> grad = DivergenceLogitGradient(r, q, d);
      ASSERT_EQ(both.logit_gradient.size(), grad.size());
      for (std::size_t v = 0; v < grad.size(); ++v) {
        EXPECT_NEAR(both.logit_gradient[v], grad[v], 1e-15) << DivergenceName(d);
      }
    }
  }
}

TEST(LogSigmoidTest, StableAtExtremes) {
  EXPECT_NEAR(LogSigmoid(0.0), -std::log(2.0), 1e-16);
  EXPECT_NEAR(LogSigmoid(-800.0), -800.0, 1e-12);
  EXPECT_NEAR(LogSigmoid(800.0), 0.0, 1e-300);
  EXPECT_TRUE(std::isfinite(LogSigmoid(-1e6)));
}

class ObjectiveTest : public ::testing::Test {
 protected:
  void SetUp() override {
    inst_ = oracle::RandomInstance(9, 12, 6, 4, 3, 6, 0.7);
    refs_ = EstimateReferences(
        inst_.full, ReferenceSet{inst_.reference_images, ReferenceCategory::kPeople},
        inst_.data);
    pool_.responses = {{1, 2, 11}, {3, 11}, {4, 5, 6, 11}};
    assignment_ = AssignIdkResponses(inst_.data, pool_, 3);
  }

  oracle::Instance inst_;
  ReferenceMap refs_;
  IdkPool pool_;
  std::map<TripleId, std::size_t> assignment_;
};

TEST_F(ObjectiveTest, GaIsNegatedNll) {
  EXPECT_DOUBLE_EQ(GaLoss(inst_.theta, inst_.data), -NllLoss(inst_.theta, inst_.data));
  GradientVector nll = LossGradient(inst_.theta, NllObjective{}, inst_.data);
  nll.Scale(-1.0);
  EXPECT_LT(nll.MaxAbsDiff(LossGradient(inst_.theta, GaObjective{}, inst_.data)), 1e-15);
}

TEST_F(ObjectiveTest, NpoAtFullModelIsTwoOverBetaLogTwo) {
  EXPECT_NEAR(NpoLoss(inst_.full, inst_.full, inst_.data, 0.4), 5.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(NpoLoss(inst_.full, inst_.full, inst_.data, 0.4), 3.465736, 1e-6);
}

TEST_F(ObjectiveTest, IdkpoAtFullModelIsOneOverBetaLogTwo) {
  EXPECT_NEAR(IdkpoLoss(inst_.full, inst_.full, inst_.data, pool_, 0.4, 3),
              2.5 * std::log(2.0), 1e-12);
}

TEST_F(ObjectiveTest, NpoVanishesForStronglyForgottenModels) {
  // One triple, with the less likely of two models playing the unlearned one.
  const std::vector<Triple> one = {inst_.data[0]};
  ModelParams uniform = inst_.full;
  for (double& v : uniform.O.values()) v = 0.0;
  const double lp_uniform = AnswerLogProb(uniform, one[0]);
  const double lp_full = AnswerLogProb(inst_.full, one[0]);
  ASSERT_NE(lp_uniform, lp_full);
  const bool uniform_lower = lp_uniform < lp_full;
  const ModelParams& theta = uniform_lower ? uniform : inst_.full;
  const ModelParams& ref = uniform_lower ? inst_.full : uniform;
  const double beta = 100.0 / std::abs(lp_uniform - lp_full);
  // (2 / beta) log(1 + e^{-100}).
  const double expected = 2.0 / beta * std::exp(-100.0);
  const double loss = NpoLoss(theta, ref, one, beta);
  EXPECT_GT(loss, 0.0);
  EXPECT_NEAR(loss, expected, 1e-9 * expected);
}

TEST_F(ObjectiveTest, VikerWithZeroLambdaEqualsGa) {
  for (Divergence d : kAllDivergences) {
    EXPECT_EQ(VikerLoss(inst_.theta, inst_.data, refs_, 0.0, d),
              GaLoss(inst_.theta, inst_.data));
    const GradientVector a =
        LossGradient(inst_.theta, VikerObjective{&refs_, 0.0, d, true}, inst_.data);
    EXPECT_EQ(a.MaxAbsDiff(LossGradient(inst_.theta, GaObjective{}, inst_.data)), 0.0);
  }
}

TEST_F(ObjectiveTest, SelfReferencesGiveZeroRegularizerAtFullModel) {
  ReferenceMap self;
  for (const Triple& t : inst_.data) self.emplace(t.id, SelfReference(inst_.full, t));
  for (Divergence d : kAllDivergences) {
    EXPECT_NEAR(VikerLoss(inst_.full, inst_.data, self, 0.5, d),
                GaLoss(inst_.full, inst_.data), 1e-12);
  }
}

TEST_F(ObjectiveTest, ValuesMatchExtendedPrecisionOracle) {
  const oracle::Params theta(inst_.theta);
  const oracle::Params full(inst_.full);
  EXPECT_NEAR(GaLoss(inst_.theta, inst_.data),
              static_cast<double>(oracle::Ga(theta, inst_.data)), 1e-12);
  for (Divergence d : kAllDivergences) {
    for (double lambda : {0.1, 0.5, 2.0}) {
      EXPECT_NEAR(VikerLoss(inst_.theta, inst_.data, refs_, lambda, d),
                  static_cast<double>(oracle::Viker(theta, inst_.data, refs_, lambda, d)),
                  1e-11);
    }
  }
  EXPECT_NEAR(NpoLoss(inst_.theta, inst_.full, inst_.data, 0.4),
              static_cast<double>(oracle::Npo(theta, full, inst_.data, 0.4L)), 1e-11);
  EXPECT_NEAR(IdkpoLoss(inst_.theta, inst_.full, inst_.data, pool_, 0.4, 3),
              static_cast<double>(oracle::Idkpo(theta, full, inst_.data, pool_.responses,
                                                assignment_, 0.4L)),
              1e-11);
}

TEST_F(ObjectiveTest, AllGradientsPassFiniteDifferenceCheck) {
  for (const NamedLoss& loss :
       StandardLosses(inst_.full, refs_, 0.5, pool_, assignment_, 0.4)) {
    const GradientCheckResult r = CheckGradient(inst_.theta, loss, inst_.data);
    EXPECT_TRUE(r.pass) << loss.name << " rel " << r.max_rel_error;
  }
}

TEST_F(ObjectiveTest, VikerRequiresReferencesForEveryTriple) {
  ReferenceMap partial = refs_;
  partial.erase(inst_.data[1].id);
  EXPECT_THROW(VikerLoss(inst_.theta, inst_.data, partial, 0.5, Divergence::kKL),
               ValidationError);
}

TEST_F(ObjectiveTest, IdkAssignmentIsDeterministic) {
  EXPECT_EQ(AssignIdkResponses(inst_.data, pool_, 3), assignment_);
  for (const auto& [id, index] : assignment_) EXPECT_LT(index, pool_.responses.size());
  EXPECT_THROW(AssignIdkResponses(inst_.data, IdkPool{}, 3), ValidationError);
}

TEST(UnlearnConfigTest, TextRoundTripAndValidation) {
  UnlearnConfig c;
  c.method = Method::kNPO;
  c.lambda = 0.25;
  c.regularizer = Divergence::kJSD;
  c.seed = 42;
  const UnlearnConfig back = UnlearnConfig::FromText(c.ToText());
  EXPECT_EQ(back.ToText(), c.ToText());
  EXPECT_EQ(back.method, Method::kNPO);

  c.lambda = -0.1;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = UnlearnConfig();
  c.k = 0;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = UnlearnConfig();
  c.beta = 0.0;
  EXPECT_THROW(c.Validate(), ValidationError);
  EXPECT_THROW(ParseMethod("sgd"), ValidationError);
  EXPECT_EQ(ParseDivergence("jsd"), Divergence::kJSD);
}

}  // namespace
}  // namespace unlearnlab
