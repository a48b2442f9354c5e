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

// Visual-guided reference distributions: the full model's per-position token
// distributions for a forget triple's (question, answer), averaged over k
// images of unrelated identities. Only forward passes are involved.

#ifndef UNLEARNLAB_REFERENCE_H_
#define UNLEARNLAB_REFERENCE_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlearnlab/model.h"

namespace unlearnlab {

enum class ReferenceCategory { kPeople, kPets, kScene, kPattern, kForget, kRetain };

std::string_view ReferenceCategoryName(ReferenceCategory category);
ReferenceCategory ParseReferenceCategory(std::string_view name);

struct ReferenceSet {
  std::vector<ImageFeature> images;
  ReferenceCategory category = ReferenceCategory::kPeople;
};

// Frozen per-position target distributions for one triple.
class ReferenceDistributions {
 public:
  ReferenceDistributions(TripleId triple_id, std::vector<TokenDistribution> per_position,
                         int source_k);

  TripleId triple_id() const { return triple_id_; }
  const std::vector<TokenDistribution>& per_position() const { return per_position_; }
  const TokenDistribution& at(std::size_t position_index) const {
    return per_position_.at(position_index);
  }
  std::size_t size() const { return per_position_.size(); }
  int source_k() const { return source_k_; }
  bool frozen() const { return true; }

 private:
  TripleId triple_id_;
  std::vector<TokenDistribution> per_position_;
  int source_k_;
};

using ReferenceMap = std::map<TripleId, ReferenceDistributions>;

// R(v) at position i = (1/k) sum_j p_full(v | I'_j, x, i), teacher-forced on
// the triple's own answer prefix. Sums run in image index order.
ReferenceDistributions EstimateReference(const ModelParams& params_full,
                                         const ReferenceSet& refs,
                                         const Triple& triple);

ReferenceMap EstimateReferences(const ModelParams& params_full,
                                const ReferenceSet& refs,
                                std::span<const Triple> triples);

// References computed from the triple's own image (no visual guidance).
ReferenceDistributions SelfReference(const ModelParams& params_full,
                                     const Triple& triple);

// Decimal text with 17 significant digits. Load re-validates every row as
// a simplex within 1e-12 and throws SimplexViolation otherwise.
void SaveReferences(const std::filesystem::path& path, const ReferenceMap& refs);
ReferenceMap LoadReferences(const std::filesystem::path& path);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_REFERENCE_H_
