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

// Deterministic synthetic persona QA benchmark.
//
// Each persona has a two-token name, three attributes (birth city,
// occupation, hobby) and a unit-norm canonical image feature. Every persona
// is asked one templated question per attribute; the answer is a fixed
// template prefix, the attribute token and the end token, so the attribute
// is the only identity-dependent (key) position.

#ifndef UNLEARNLAB_DATA_SYNTH_H_
#define UNLEARNLAB_DATA_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlearnlab/losses.h"
#include "unlearnlab/model.h"
#include "unlearnlab/reference.h"

namespace unlearnlab {

inline constexpr int kNumSlots = 3;
inline constexpr int kValuesPerSlot = 10;

// Fixed vocabulary layout: template words, then names, then per-slot
// attribute values, with the end token at vocab_size - 1.
namespace vocab {
enum Word : TokenId {
  kWhere = 0, kWas, kThis, kPerson, kBorn, kWhat, kDoes, kDo, kFor, kWork,
  kEnjoy, kIn, kQuestionMark, kWorks, kAs, kEnjoys, kI, kDont, kKnow,
  kCannot, kSay,
  kNumTemplateWords
};
inline constexpr TokenId kFirstName = kNumTemplateWords;
int NumNameTokens(int vocab_size);
TokenId AttributeToken(int vocab_size, int slot, int value);
// Slot of an attribute token, or -1.
int SlotOfToken(int vocab_size, TokenId token);
std::string_view WordName(TokenId token);
}  // namespace vocab

struct BenchmarkSpec {
  int n_personas = 48;
  int images_per_persona = 3;
  double forget_fraction = 0.10;
  double feature_noise_sigma = 0.05;
  std::uint64_t seed = 1;
  int vocab_size = 64;
  int img_dim = 8;
  int reference_pool_size = 8;

  void Validate() const;
  int NumForgetPersonas() const;
  std::string ToText() const;
  static BenchmarkSpec FromText(std::string_view text);
};

struct Persona {
  int id = 0;
  TokenSeq name;  // two tokens
  std::array<TokenId, kNumSlots> attributes{};
  std::vector<double> canonical_feature;
};

enum class SplitTag { kForget, kRetain, kGeneralization };
std::string_view SplitName(SplitTag tag);
SplitTag ParseSplit(std::string_view name);

struct DatasetSplit {
  int vocab_size = 64;
  int img_dim = 8;
  std::vector<Persona> personas;
  std::vector<Triple> forget;
  std::vector<Triple> retain;
  std::vector<Triple> generalization;
  std::map<std::string, std::vector<ImageFeature>> reference_pools;
  IdkPool idk_pool;

  // forget ++ retain: the fine-tuning set.
  std::vector<Triple> Full() const;
  const std::vector<Triple>& Split(SplitTag tag) const;
  const Persona& PersonaById(int id) const;
  const Triple& TripleById(TripleId id) const;
  // Throws ValidationError on any split or vocabulary invariant violation.
  void Validate() const;
};

DatasetSplit GenerateBenchmark(const BenchmarkSpec& spec);

// Template-only corpus for the origin model: random images paired with every
// attribute value of every slot, so no image carries identity information.
std::vector<Triple> GeneratePretrainingCorpus(const BenchmarkSpec& spec,
                                              int num_images = 16);

// The fixed refusal responses used by IdkPO.
IdkPool DefaultIdkPool(int vocab_size);

// First k images of the named pool. The forget/retain categories use the
// first image of each forget/retain persona in split order. Throws
// ValidationError naming the pool if it is missing or too small.
ReferenceSet SelectReferenceSet(const DatasetSplit& data, ReferenceCategory category,
                                int k);

void SaveDataset(const std::filesystem::path& path, const DatasetSplit& data);
DatasetSplit LoadDataset(const std::filesystem::path& path);

// Multiple-choice item: the true answer plus distractors that swap the
// attribute token for other values of the same slot.
struct McItem {
  const Triple* triple = nullptr;  // not owned
  std::vector<TokenSeq> candidates;
  std::size_t correct_index = 0;
};

std::vector<McItem> MultipleChoiceItems(std::span<const Triple> triples, int vocab_size,
                                        int num_distractors, std::uint64_t seed);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_DATA_SYNTH_H_
