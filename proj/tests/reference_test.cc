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

#include "unlearnlab/reference.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "oracle/oracle.h"
#include "unlearnlab/checkpoint.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  return fs::path(::testing::TempDir()) / "unlearnlab_reference_test" / name;
}

ReferenceSet People(const std::vector<ImageFeature>& images) {
  return ReferenceSet{images, ReferenceCategory::kPeople};
}

TEST(EstimateReferenceTest, SingleImageEqualsForwardDistribution) {
  const oracle::Instance inst = oracle::RandomInstance(1, 8, 6);
  const Triple& t = inst.data[0];
  const ReferenceDistributions r =
      EstimateReference(inst.full, People({inst.reference_images[0]}), t);
  ASSERT_EQ(r.size(), t.answer.size());
  EXPECT_EQ(r.source_k(), 1);
  EXPECT_TRUE(r.frozen());
  for (std::size_t i = 0; i < t.answer.size(); ++i) {
    const TokenSeq prefix(t.answer.begin(), t.answer.begin() + i);
    const TokenDistribution d = ForwardTokenDist(inst.full, inst.reference_images[0],
                                                 t.question, prefix, int(i) + 1);
    EXPECT_EQ(r.at(i).probs, d.probs);
  }
}

TEST(EstimateReferenceTest, TwoPointAverage) {
  // Two images whose first-position distributions assign 0.3 and 0.5 to
  // token 0 average to 0.4.
  ModelConfig c;
  c.vocab_size = 2;
  c.img_dim = 1;
  c.hidden_dim = 1;
  c.max_positions = 2;
  ModelParams p(c);
  p.P(0, 0) = 1.0;
  p.O(0, 0) = 0.5;
  p.O(1, 0) = -0.5;
  const auto image_for = [](double prob0) {
    // softmax([h/2, -h/2])[0] = sigmoid(h) = prob0.
    return ImageFeature{{std::atanh(std::log(prob0 / (1 - prob0)))}, ImageCategory::kPeople};
  };
  Triple t{7, -1, image_for(0.7), {0}, {1}, {}};
  const ReferenceDistributions r =
      EstimateReference(p, People({image_for(0.3), image_for(0.5)}), t);
  EXPECT_NEAR(r.at(0).probs[0], 0.4, 1e-15);
  EXPECT_NEAR(r.at(0).probs[1], 0.6, 1e-15);
}

TEST(EstimateReferenceTest, EqualsBruteForceAverageAndIsSimplex) {
  for (int seed = 0; seed < 5; ++seed) {
    const oracle::Instance inst = oracle::RandomInstance(seed, 8, 6);
    const ReferenceMap refs =
        EstimateReferences(inst.full, People(inst.reference_images), inst.data);
    const oracle::Params full(inst.full);
    for (const Triple& t : inst.data) {
      const ReferenceDistributions& r = refs.at(t.id);
      EXPECT_EQ(r.source_k(), 5);
      for (std::size_t i = 0; i < t.answer.size(); ++i) {
        const TokenSeq prefix(t.answer.begin(), t.answer.begin() + i);
        oracle::Dist avg(8, 0.0L);
        for (const ImageFeature& img : inst.reference_images) {
          const oracle::Dist d = oracle::Forward(full, img.z, t.question, prefix);
          for (int v = 0; v < 8; ++v) avg[v] += d[v] / 5;
        }
        double sum = 0.0;
        for (int v = 0; v < 8; ++v) {
          EXPECT_NEAR(r.at(i).probs[v], static_cast<double>(avg[v]), 1e-14);
          sum += r.at(i).probs[v];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(EstimateReferenceTest, InvariantToImageOrder) {
  const oracle::Instance inst = oracle::RandomInstance(2, 8, 6);
  std::vector<ImageFeature> shuffled = inst.reference_images;
  std::reverse(shuffled.begin(), shuffled.end());
  const ReferenceDistributions a =
      EstimateReference(inst.full, People(inst.reference_images), inst.data[0]);
  const ReferenceDistributions b = EstimateReference(inst.full, People(shuffled), inst.data[0]);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t v = 0; v < a.at(i).size(); ++v) {
      EXPECT_NEAR(a.at(i).probs[v], b.at(i).probs[v], 1e-15);
    }
  }
}

TEST(EstimateReferenceTest, LeavesParamsUntouched) {
  const oracle::Instance inst = oracle::RandomInstance(3, 8, 6);
  const std::string before = ParamsChecksum(inst.full);
  EstimateReferences(inst.full, People(inst.reference_images), inst.data);
  EXPECT_EQ(ParamsChecksum(inst.full), before);
}

TEST(EstimateReferenceTest, RejectsEmptyOrMismatchedSets) {
  const oracle::Instance inst = oracle::RandomInstance(4, 8, 6);
  EXPECT_THROW(EstimateReference(inst.full, People({}), inst.data[0]), ValidationError);
  ImageFeature wrong{{1.0, 2.0}, ImageCategory::kPeople};
  EXPECT_THROW(EstimateReference(inst.full, People({wrong}), inst.data[0]), ValidationError);
}

TEST(SelfReferenceTest, EqualsForwardOnTheTripleImage) {
  const oracle::Instance inst = oracle::RandomInstance(5, 8, 6);
  const Triple& t = inst.data[1];
  const ReferenceDistributions r = SelfReference(inst.full, t);
  const TokenDistribution d = ForwardTokenDist(inst.full, t.image, t.question, {}, 1);
  EXPECT_EQ(r.at(0).probs, d.probs);
}

TEST(ReferenceDistributionsTest, RejectsNonSimplexRows) {
  EXPECT_THROW(ReferenceDistributions(1, {TokenDistribution::FromProbs({0.6, 0.3})}, 1),
               SimplexViolation);
  EXPECT_THROW(ReferenceDistributions(1, {TokenDistribution::FromProbs({0.5, 0.5})}, 0),
               ValidationError);
}

TEST(ReferenceFileTest, RoundTripIsExact) {
  const oracle::Instance inst = oracle::RandomInstance(6, 8, 6);
  const ReferenceMap refs =
      EstimateReferences(inst.full, People(inst.reference_images), inst.data);
  SaveReferences(TempPath("refs.txt"), refs);
  const ReferenceMap back = LoadReferences(TempPath("refs.txt"));
  ASSERT_EQ(back.size(), refs.size());
  for (const auto& [id, r] : refs) {
    ASSERT_EQ(back.at(id).size(), r.size());
    EXPECT_EQ(back.at(id).source_k(), r.source_k());
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(back.at(id).at(i).probs, r.at(i).probs);
    }
  }
}

TEST(ReferenceFileTest, RejectsBadRowsAndTruncation) {
  text::WriteFile(TempPath("bad_row.txt"),
                  "# unlearnlab references v1\nref 1 5 1 2\n0.5 0.4\nend\n");
  EXPECT_THROW(LoadReferences(TempPath("bad_row.txt")), SimplexViolation);

  text::WriteFile(TempPath("trunc.txt"), "# unlearnlab references v1\nref 1 5 2 2\n0.5 0.5\n");
  EXPECT_THROW(LoadReferences(TempPath("trunc.txt")), ParseError);

  text::WriteFile(TempPath("noend.txt"), "# unlearnlab references v1\nref 1 5 1 2\n0.5 0.5\n");
  EXPECT_THROW(LoadReferences(TempPath("noend.txt")), ParseError);

  text::WriteFile(TempPath("width.txt"),
                  "# unlearnlab references v1\nref 1 5 1 3\n0.5 0.5\nend\n");
  EXPECT_THROW(LoadReferences(TempPath("width.txt")), ParseError);
}

TEST(ReferenceCategoryTest, NamesRoundTrip) {
  for (ReferenceCategory c : {ReferenceCategory::kPeople, ReferenceCategory::kPets,
                              ReferenceCategory::kScene, ReferenceCategory::kPattern,
                              ReferenceCategory::kForget, ReferenceCategory::kRetain}) {
    EXPECT_EQ(ParseReferenceCategory(ReferenceCategoryName(c)), c);
  }
  EXPECT_THROW(ParseReferenceCategory("cars"), ValidationError);
}

}  // namespace
}  // namespace unlearnlab
