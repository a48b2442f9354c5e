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

#include <string>
#include <utility>

#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

namespace {

constexpr std::string_view kReferenceHeader = "# unlearnlab references v1";
constexpr double kSimplexTolerance = 1e-12;

}  // namespace

std::string_view ReferenceCategoryName(ReferenceCategory category) {
  switch (category) {
    case ReferenceCategory::kPeople: return "people";
    case ReferenceCategory::kPets: return "pets";
    case ReferenceCategory::kScene: return "scene";
    case ReferenceCategory::kPattern: return "pattern";
    case ReferenceCategory::kForget: return "forget";
    case ReferenceCategory::kRetain: return "retain";
  }
  return "people";
}

ReferenceCategory ParseReferenceCategory(std::string_view name) {
  for (ReferenceCategory c :
       {ReferenceCategory::kPeople, ReferenceCategory::kPets, ReferenceCategory::kScene,
        ReferenceCategory::kPattern, ReferenceCategory::kForget,
        ReferenceCategory::kRetain}) {
    if (ReferenceCategoryName(c) == name) return c;
  }
  throw ValidationError("unknown reference category '" + std::string(name) + "'");
}

ReferenceDistributions::ReferenceDistributions(
    TripleId triple_id, std::vector<TokenDistribution> per_position, int source_k)
    : triple_id_(triple_id), per_position_(std::move(per_position)), source_k_(source_k) {
  if (source_k_ < 1) throw ValidationError("reference distributions need k >= 1");
  for (const TokenDistribution& d : per_position_) d.ValidateSimplex(kSimplexTolerance);
}

ReferenceDistributions EstimateReference(const ModelParams& params_full,
                                         const ReferenceSet& refs,
                                         const Triple& triple) {
  if (refs.images.empty()) throw ValidationError("reference set is empty");
  for (const ImageFeature& img : refs.images) {
    if (static_cast<int>(img.z.size()) != params_full.config.img_dim) {
      throw ValidationError("reference image dimension " + std::to_string(img.z.size()) +
                            " does not match model img_dim " +
                            std::to_string(params_full.config.img_dim));
    }
  }
  ValidateTriple(params_full.config, triple);

  const std::size_t vocab = params_full.config.vocab_size;
  const double k = static_cast<double>(refs.images.size());
  std::vector<TokenDistribution> per_position;
  per_position.reserve(triple.answer.size());
  const std::span<const TokenId> answer(triple.answer);
  for (std::size_t i = 0; i < answer.size(); ++i) {
    std::vector<double> sum(vocab, 0.0);
    for (const ImageFeature& img : refs.images) {
      const PositionActivations act = ForwardPosition(
          params_full, img, triple.question, answer.first(i), static_cast<int>(i) + 1);
      for (std::size_t v = 0; v < vocab; ++v) sum[v] += act.dist.probs[v];
    }
    for (double& x : sum) x /= k;
    per_position.push_back(TokenDistribution::FromProbs(std::move(sum)));
  }
  return ReferenceDistributions(triple.id, std::move(per_position),
                                static_cast<int>(refs.images.size()));
}

ReferenceMap EstimateReferences(const ModelParams& params_full,
                                const ReferenceSet& refs,
                                std::span<const Triple> triples) {
  ReferenceMap out;
  for (const Triple& t : triples) {
    out.emplace(t.id, EstimateReference(params_full, refs, t));
  }
  return out;
}

ReferenceDistributions SelfReference(const ModelParams& params_full,
                                     const Triple& triple) {
  ReferenceSet self;
  self.images.push_back(triple.image);
  self.category = ReferenceCategory::kForget;
  return EstimateReference(params_full, self, triple);
}

void SaveReferences(const std::filesystem::path& path, const ReferenceMap& refs) {
  std::string out(kReferenceHeader);
  out += "\n";
  for (const auto& [id, r] : refs) {
    const std::size_t vocab = r.size() == 0 ? 0 : r.at(0).size();
    out += "ref " + std::to_string(id) + " " + std::to_string(r.source_k()) + " " +
           std::to_string(r.size()) + " " + std::to_string(vocab) + "\n";
    for (const TokenDistribution& d : r.per_position()) {
      out += text::JoinDoubles(d.probs) + "\n";
    }
  }
  out += "end\n";
  text::WriteFile(path, out);
}

ReferenceMap LoadReferences(const std::filesystem::path& path) {
  const std::vector<std::string> lines = text::Split(text::ReadFile(path), '\n');
  if (lines.empty() || lines[0] != kReferenceHeader) {
    throw ParseError("'" + path.string() + "' is not a reference file");
  }
  ReferenceMap out;
  std::size_t li = 1;
  bool saw_end = false;
  while (li < lines.size()) {
    const std::vector<std::string> head = text::SplitWhitespace(lines[li++]);
    if (head.empty()) continue;
    if (head[0] == "end") {
      saw_end = true;
      break;
    }
    if (head.size() != 5 || head[0] != "ref") {
      throw ParseError("malformed reference header line " + std::to_string(li));
    }
    const TripleId id = text::ParseInt(head[1]);
    const int k = static_cast<int>(text::ParseInt(head[2]));
    const std::size_t positions = text::ParseUint(head[3]);
    const std::size_t vocab = text::ParseUint(head[4]);
    std::vector<TokenDistribution> dists;
    for (std::size_t p = 0; p < positions; ++p) {
      if (li >= lines.size()) throw ParseError("truncated reference file");
      const std::vector<std::string> cells = text::SplitWhitespace(lines[li++]);
      if (cells.size() != vocab) {
        throw ParseError("reference row has " + std::to_string(cells.size()) +
                         " entries, expected " + std::to_string(vocab));
      }
      std::vector<double> probs;
      probs.reserve(vocab);
      for (const std::string& c : cells) probs.push_back(text::ParseDouble(c));
      dists.push_back(TokenDistribution::FromProbs(std::move(probs)));
    }
    out.emplace(id, ReferenceDistributions(id, std::move(dists), k));
  }
  if (!saw_end) throw ParseError("truncated reference file (missing end marker)");
  return out;
}

}  // namespace unlearnlab
