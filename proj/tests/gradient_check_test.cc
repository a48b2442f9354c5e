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

#include "unlearnlab/gradient_check.h"

#include <gtest/gtest.h>

#include "oracle/oracle.h"

namespace unlearnlab {
namespace {

class GradientCheckTest : public ::testing::Test {
 protected:
  void SetUp() override {
    inst_ = oracle::RandomInstance(21, 10, 5);
    refs_ = EstimateReferences(
        inst_.full, ReferenceSet{inst_.reference_images, ReferenceCategory::kPeople},
        inst_.data);
    pool_.responses = {{1, 9}, {2, 3, 9}};
    assignment_ = AssignIdkResponses(inst_.data, pool_, 1);
  }
  oracle::Instance inst_;
  ReferenceMap refs_;
  IdkPool pool_;
  std::map<TripleId, std::size_t> assignment_;
};

TEST_F(GradientCheckTest, StandardLossesHaveStableNames) {
  std::vector<std::string> names;
  for (const NamedLoss& l : StandardLosses(inst_.full, refs_, 0.5, pool_, assignment_, 0.4)) {
    names.push_back(l.name);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"nll", "ga", "viker_kl", "viker_jsd", "viker_cos",
                                             "npo", "idkpo"}));
}

TEST_F(GradientCheckTest, AnalyticGradientsAgreeWithExtendedPrecisionDifferences) {
  const oracle::Params full(inst_.full);
  const auto losses = StandardLosses(inst_.full, refs_, 0.5, pool_, assignment_, 0.4);
  const std::vector<std::function<oracle::Real(const oracle::Params&)>> oracles = {
      [&](const oracle::Params& p) { return oracle::Nll(p, inst_.data); },
      [&](const oracle::Params& p) { return oracle::Ga(p, inst_.data); },
      [&](const oracle::Params& p) {
        return oracle::Viker(p, inst_.data, refs_, 0.5L, Divergence::kKL);
      },
      [&](const oracle::Params& p) {
        return oracle::Viker(p, inst_.data, refs_, 0.5L, Divergence::kJSD);
      },
      [&](const oracle::Params& p) {
        return oracle::Viker(p, inst_.data, refs_, 0.5L, Divergence::kCoS);
      },
      [&](const oracle::Params& p) { return oracle::Npo(p, full, inst_.data, 0.4L); },
      [&](const oracle::Params& p) {
        return oracle::Idkpo(p, full, inst_.data, pool_.responses, assignment_, 0.4L);
      },
  };
  for (std::size_t k = 0; k < losses.size(); ++k) {
    const std::vector<double> analytic =
        LossGradient(inst_.theta, losses[k].spec, inst_.data).Flatten();
    const auto fd = oracle::FdGradient(inst_.theta, oracles[k]);
    EXPECT_LT(oracle::MaxRelError(analytic, fd), 1e-6) << losses[k].name;
  }
}

TEST_F(GradientCheckTest, HookIsReportedAsFailure) {
  GradientCheckOptions opts;
  opts.analytic_hook = [](GradientVector& g) { g.O(0, 0) += 1e-3; };
  const NamedLoss ga{"ga", GaObjective{}};
  EXPECT_TRUE(CheckGradient(inst_.theta, ga, inst_.data).pass);
  const GradientCheckResult r = CheckGradient(inst_.theta, ga, inst_.data, opts);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_rel_error, 1e-4);
  EXPECT_EQ(r.loss, "ga");
}

TEST_F(GradientCheckTest, CountsCheckedComponents) {
  const GradientCheckResult r =
      CheckGradient(inst_.theta, {"nll", NllObjective{}}, inst_.data);
  EXPECT_EQ(r.num_components, static_cast<int>(inst_.theta.NumValues()));
  EXPECT_GT(r.num_checked, 0);
  EXPECT_LE(r.num_checked, r.num_components);
}

}  // namespace
}  // namespace unlearnlab
