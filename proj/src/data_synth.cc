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

#include "unlearnlab/data_synth.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

namespace vocab {

namespace {
constexpr int kReservedTokens = kNumTemplateWords + kNumSlots * kValuesPerSlot + 1;
}  // namespace

int NumNameTokens(int vocab_size) { return vocab_size - kReservedTokens; }

TokenId AttributeToken(int vocab_size, int slot, int value) {
  return kFirstName + NumNameTokens(vocab_size) + slot * kValuesPerSlot + value;
}

int SlotOfToken(int vocab_size, TokenId token) {
  const TokenId first = AttributeToken(vocab_size, 0, 0);
  if (token < first || token >= first + kNumSlots * kValuesPerSlot) return -1;
  return (token - first) / kValuesPerSlot;
}

std::string_view WordName(TokenId token) {
  static constexpr std::string_view kNames[] = {
      "where", "was", "this", "person", "born", "what", "does", "do", "for", "work",
      "enjoy", "in", "?", "works", "as", "enjoys", "i", "don't", "know", "cannot", "say"};
  if (token >= 0 && token < kNumTemplateWords) return kNames[token];
  return "";
}

}  // namespace vocab

namespace {

using namespace vocab;

const TokenSeq& QuestionTemplate(int slot) {
  static const TokenSeq kQuestions[kNumSlots] = {
      {kWhere, kWas, kThis, kPerson, kBorn, kQuestionMark},
      {kWhat, kDoes, kThis, kPerson, kDo, kFor, kWork, kQuestionMark},
      {kWhat, kDoes, kThis, kPerson, kEnjoy, kQuestionMark},
  };
  return kQuestions[slot];
}

const TokenSeq& AnswerPrefix(int slot) {
  static const TokenSeq kPrefixes[kNumSlots] = {
      {kThis, kPerson, kWas, kBorn, kIn},
      {kThis, kPerson, kWorks, kAs},
      {kThis, kPerson, kEnjoys},
  };
  return kPrefixes[slot];
}

Triple MakeTriple(TripleId id, int persona_id, const ImageFeature& image, int slot,
                  TokenId attribute, TokenId end_token) {
  Triple t;
  t.id = id;
  t.persona_id = persona_id;
  t.image = image;
  t.question = QuestionTemplate(slot);
  t.answer = AnswerPrefix(slot);
  t.key_mask.assign(t.answer.size(), false);
  t.answer.push_back(attribute);
  t.key_mask.push_back(true);
  t.answer.push_back(end_token);
  t.key_mask.push_back(false);
  return t;
}

std::vector<double> Normalize(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> Gaussian(std::mt19937_64& rng, int dim, double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

}  // namespace

void BenchmarkSpec::Validate() const {
  if (n_personas < 1) throw ValidationError("n_personas must be >= 1");
  if (images_per_persona < 2) {
    throw ValidationError("images_per_persona must be >= 2 (one is held out)");
  }
  if (!(forget_fraction > 0.0 && forget_fraction < 1.0)) {
    throw ValidationError("forget_fraction must lie strictly between 0 and 1");
  }
  if (!(feature_noise_sigma >= 0.0)) throw ValidationError("feature_noise_sigma must be >= 0");
  if (img_dim < 1) throw ValidationError("img_dim must be >= 1");
  if (reference_pool_size < 1) throw ValidationError("reference_pool_size must be >= 1");
  const int names = vocab::NumNameTokens(vocab_size);
  const long long needed = static_cast<long long>(n_personas) + reference_pool_size;
  if (names < 2 || static_cast<long long>(names) * (names - 1) < needed) {
    throw ValidationError("vocabulary of size " + std::to_string(vocab_size) +
                          " is too small for " + std::to_string(needed) +
                          " distinct persona names");
  }
  if (NumForgetPersonas() >= n_personas) {
    throw ValidationError("forget_fraction leaves no retain personas");
  }
}

int BenchmarkSpec::NumForgetPersonas() const {
  // Round before ceil so 0.1 * 50 = 5.000000000000001 still gives 5.
  const double raw = forget_fraction * n_personas;
  return static_cast<int>(std::ceil(std::round(raw * 1e9) / 1e9));
}

std::string BenchmarkSpec::ToText() const {
  text::KeyValues kv;
  kv["n_personas"] = std::to_string(n_personas);
  kv["images_per_persona"] = std::to_string(images_per_persona);
  kv["forget_fraction"] = text::FormatDouble(forget_fraction);
  kv["feature_noise_sigma"] = text::FormatDouble(feature_noise_sigma);
  kv["seed"] = std::to_string(seed);
  kv["vocab_size"] = std::to_string(vocab_size);
  kv["img_dim"] = std::to_string(img_dim);
  kv["reference_pool_size"] = std::to_string(reference_pool_size);
  return "# unlearnlab benchmark spec v1\n" + text::FormatKeyValues(kv);
}

BenchmarkSpec BenchmarkSpec::FromText(std::string_view doc) {
  BenchmarkSpec s;
  for (const auto& [key, value] : text::ParseKeyValues(doc)) {
    if (key == "n_personas") s.n_personas = static_cast<int>(text::ParseInt(value));
    else if (key == "images_per_persona") s.images_per_persona = static_cast<int>(text::ParseInt(value));
    else if (key == "forget_fraction") s.forget_fraction = text::ParseDouble(value);
    else if (key == "feature_noise_sigma") s.feature_noise_sigma = text::ParseDouble(value);
    else if (key == "seed") s.seed = text::ParseUint(value);
    else if (key == "vocab_size") s.vocab_size = static_cast<int>(text::ParseInt(value));
    else if (key == "img_dim") s.img_dim = static_cast<int>(text::ParseInt(value));
    else if (key == "reference_pool_size") s.reference_pool_size = static_cast<int>(text::ParseInt(value));
    else throw ParseError("unknown benchmark spec key '" + key + "'");
  }
  s.Validate();
  return s;
}

std::string_view SplitName(SplitTag tag) {
  switch (tag) {
    case SplitTag::kForget: return "forget";
    case SplitTag::kRetain: return "retain";
    case SplitTag::kGeneralization: return "generalization";
  }
  return "forget";
}

SplitTag ParseSplit(std::string_view name) {
  for (SplitTag t : {SplitTag::kForget, SplitTag::kRetain, SplitTag::kGeneralization}) {
    if (SplitName(t) == name) return t;
  }
  throw ParseError("unknown split tag '" + std::string(name) + "'");
}

std::vector<Triple> DatasetSplit::Full() const {
  std::vector<Triple> out = forget;
  out.insert(out.end(), retain.begin(), retain.end());
  return out;
}

const std::vector<Triple>& DatasetSplit::Split(SplitTag tag) const {
  switch (tag) {
    case SplitTag::kForget: return forget;
    case SplitTag::kRetain: return retain;
    case SplitTag::kGeneralization: return generalization;
  }
  return forget;
}

const Persona& DatasetSplit::PersonaById(int id) const {
  for (const Persona& p : personas) {
    if (p.id == id) return p;
  }
  throw ValidationError("unknown persona id " + std::to_string(id));
}

const Triple& DatasetSplit::TripleById(TripleId id) const {
  for (const auto* split : {&forget, &retain, &generalization}) {
    for (const Triple& t : *split) {
      if (t.id == id) return t;
    }
  }
  throw ValidationError("unknown triple id " + std::to_string(id));
}

void DatasetSplit::Validate() const {
  ModelConfig config;
  config.vocab_size = vocab_size;
  config.img_dim = img_dim;
  // Answer lengths are checked against the model when training starts.
  config.max_positions = 1 << 20;
  config.Validate();

  std::set<int> persona_ids;
  for (const Persona& p : personas) {
    if (!persona_ids.insert(p.id).second) {
      throw ValidationError("duplicate persona id " + std::to_string(p.id));
    }
  }
  std::set<TripleId> ids;
  std::set<int> forget_personas;
  std::set<int> retain_personas;
  for (SplitTag tag : {SplitTag::kForget, SplitTag::kRetain, SplitTag::kGeneralization}) {
    for (const Triple& t : Split(tag)) {
      ValidateTriple(config, t);
      if (!ids.insert(t.id).second) {
        throw ValidationError("triple id " + std::to_string(t.id) +
                              " appears more than once");
      }
      if (!persona_ids.empty() && persona_ids.count(t.persona_id) == 0) {
        throw ValidationError("triple " + std::to_string(t.id) + " has unknown persona");
      }
      if (!t.key_mask.empty() &&
          std::count(t.key_mask.begin(), t.key_mask.end(), true) != 1) {
        throw ValidationError("triple " + std::to_string(t.id) +
                              " must have exactly one key position");
      }
      if (tag == SplitTag::kForget) forget_personas.insert(t.persona_id);
      if (tag == SplitTag::kRetain) retain_personas.insert(t.persona_id);
    }
  }
  for (int p : forget_personas) {
    if (retain_personas.count(p) != 0) {
      throw ValidationError("persona " + std::to_string(p) +
                            " appears in both the forget and retain splits");
    }
  }
  for (const Triple& t : generalization) {
    if (forget_personas.count(t.persona_id) == 0) {
      throw ValidationError("generalization triple " + std::to_string(t.id) +
                            " does not belong to a forget persona");
    }
  }
  for (const auto& [name, pool] : reference_pools) {
    for (const ImageFeature& img : pool) {
      if (static_cast<int>(img.z.size()) != img_dim) {
        throw ValidationError("reference pool '" + name + "' has a wrong-sized feature");
      }
    }
  }
  if (!idk_pool.responses.empty()) idk_pool.Validate(config);
}

IdkPool DefaultIdkPool(int vocab_size) {
  const TokenId end = vocab_size - 1;
  IdkPool pool;
  pool.responses = {
      {kI, kDont, kKnow, end},
      {kI, kCannot, kSay, end},
      {kI, kDont, kKnow, kThis, kPerson, end},
      {kI, kCannot, kSay, kWhat, kThis, kPerson, kDoes, end},
      {kI, kDont, kKnow, kWhere, kThis, kPerson, kWas, kBorn, end},
      {kI, kCannot, kSay, kWhere, end},
      {kI, kDont, kKnow, kWhat, kThis, kPerson, kEnjoys, end},
      {kI, kCannot, kSay, kThis, end},
  };
  return pool;
}

DatasetSplit GenerateBenchmark(const BenchmarkSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  const int names = vocab::NumNameTokens(spec.vocab_size);
  const TokenId end = spec.vocab_size - 1;

  DatasetSplit data;
  data.vocab_size = spec.vocab_size;
  data.img_dim = spec.img_dim;
  data.idk_pool = DefaultIdkPool(spec.vocab_size);

  // Distinct ordered name pairs, one per persona.
  std::vector<std::pair<int, int>> name_pairs;
  for (int a = 0; a < names; ++a) {
    for (int b = 0; b < names; ++b) {
      if (a != b) name_pairs.emplace_back(a, b);
    }
  }
  std::shuffle(name_pairs.begin(), name_pairs.end(), rng);

  std::uniform_int_distribution<int> value_dist(0, kValuesPerSlot - 1);
  for (int p = 0; p < spec.n_personas; ++p) {
    Persona persona;
    persona.id = p;
    persona.name = {kFirstName + name_pairs[p].first, kFirstName + name_pairs[p].second};
    for (int s = 0; s < kNumSlots; ++s) {
      persona.attributes[s] = vocab::AttributeToken(spec.vocab_size, s, value_dist(rng));
    }
    persona.canonical_feature = Normalize(Gaussian(rng, spec.img_dim, 1.0));
    data.personas.push_back(std::move(persona));
  }

  // The first NumForgetPersonas() personas of a shuffled order are forgotten.
  std::vector<int> order(spec.n_personas);
  for (int p = 0; p < spec.n_personas; ++p) order[p] = p;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_forget(spec.n_personas, false);
  for (int j = 0; j < spec.NumForgetPersonas(); ++j) is_forget[order[j]] = true;

  TripleId next_id = 0;
  for (const Persona& persona : data.personas) {
    for (int img = 0; img < spec.images_per_persona; ++img) {
      std::vector<double> z = persona.canonical_feature;
      const std::vector<double> noise =
          Gaussian(rng, spec.img_dim, spec.feature_noise_sigma);
      for (int j = 0; j < spec.img_dim; ++j) z[j] += noise[j];
      ImageFeature image{Normalize(std::move(z)), ImageCategory::kPersona};
      const bool held_out = img == spec.images_per_persona - 1;
      for (int s = 0; s < kNumSlots; ++s) {
        Triple t = MakeTriple(next_id++, persona.id, image, s, persona.attributes[s], end);
        if (!is_forget[persona.id]) {
          data.retain.push_back(std::move(t));
        } else if (held_out) {
          data.generalization.push_back(std::move(t));
        } else {
          data.forget.push_back(std::move(t));
        }
      }
    }
  }

  const int pool = spec.reference_pool_size;
  auto& people = data.reference_pools["people"];
  for (int j = 0; j < pool; ++j) {
    people.push_back({Normalize(Gaussian(rng, spec.img_dim, 1.0)), ImageCategory::kPeople});
  }
  // Tight cluster at half the persona norm.
  const std::vector<double> pet_center = Normalize(Gaussian(rng, spec.img_dim, 1.0));
  auto& pets = data.reference_pools["pets"];
  for (int j = 0; j < pool; ++j) {
    std::vector<double> z = pet_center;
    const std::vector<double> noise = Gaussian(rng, spec.img_dim, 0.05);
    for (int d = 0; d < spec.img_dim; ++d) z[d] += noise[d];
    z = Normalize(std::move(z));
    for (double& x : z) x *= 0.5;
    pets.push_back({std::move(z), ImageCategory::kPets});
  }
  auto& scene = data.reference_pools["scene"];
  for (int j = 0; j < pool; ++j) {
    scene.push_back({Gaussian(rng, spec.img_dim, 1.0), ImageCategory::kScene});
  }
  // Near-constant vectors along the all-ones direction.
  auto& pattern = data.reference_pools["pattern"];
  const double c = 1.0 / std::sqrt(static_cast<double>(spec.img_dim));
  for (int j = 0; j < pool; ++j) {
    std::vector<double> z = Gaussian(rng, spec.img_dim, 0.01);
    for (double& x : z) x += c;
    pattern.push_back({std::move(z), ImageCategory::kPattern});
  }
  data.Validate();
  return data;
}

std::vector<Triple> GeneratePretrainingCorpus(const BenchmarkSpec& spec, int num_images) {
  spec.Validate();
  // Independent stream so the corpus does not shift with benchmark changes.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const TokenId end = spec.vocab_size - 1;
  std::vector<Triple> out;
  TripleId id = 0;
  for (int img = 0; img < num_images; ++img) {
    ImageFeature image{Normalize(Gaussian(rng, spec.img_dim, 1.0)), ImageCategory::kPersona};
    for (int s = 0; s < kNumSlots; ++s) {
      for (int v = 0; v < kValuesPerSlot; ++v) {
        out.push_back(MakeTriple(id++, -1, image, s,
                                 vocab::AttributeToken(spec.vocab_size, s, v), end));
      }
    }
  }
  return out;
}

ReferenceSet SelectReferenceSet(const DatasetSplit& data, ReferenceCategory category,
                                int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  ReferenceSet set;
  set.category = category;
  const std::string name(ReferenceCategoryName(category));
  if (category == ReferenceCategory::kForget || category == ReferenceCategory::kRetain) {
    const auto& split = category == ReferenceCategory::kForget ? data.forget : data.retain;
    std::set<int> seen;
    for (const Triple& t : split) {
      if (static_cast<int>(set.images.size()) == k) break;
      if (seen.insert(t.persona_id).second) set.images.push_back(t.image);
    }
  } else {
    const auto it = data.reference_pools.find(name);
    if (it == data.reference_pools.end() || it->second.empty()) {
      throw ValidationError("dataset has no '" + name + "' reference pool");
    }
    for (const ImageFeature& img : it->second) {
      if (static_cast<int>(set.images.size()) == k) break;
      set.images.push_back(img);
    }
  }
  if (static_cast<int>(set.images.size()) < k) {
    throw ValidationError("reference pool '" + name + "' has fewer than " +
                          std::to_string(k) + " images");
  }
  return set;
}

namespace {

constexpr std::string_view kDatasetHeader = "# unlearnlab dataset v1";

template <typename Int>
std::string JoinTokens(const std::vector<Int>& v) {
  return text::JoinInts<int>(std::span<const int>(v.data(), v.size()));
}

TokenSeq ParseTokens(std::string_view field) {
  TokenSeq out;
  for (const std::string& tok : text::SplitWhitespace(field)) {
    out.push_back(static_cast<TokenId>(text::ParseInt(tok)));
  }
  return out;
}

std::vector<double> ParseDoubles(const std::vector<std::string>& cells, std::size_t from) {
  std::vector<double> out;
  for (std::size_t i = from; i < cells.size(); ++i) out.push_back(text::ParseDouble(cells[i]));
  return out;
}

}  // namespace

void SaveDataset(const std::filesystem::path& path, const DatasetSplit& data) {
  data.Validate();
  std::string out(kDatasetHeader);
  out += "\nvocab_size " + std::to_string(data.vocab_size) + "\n";
  out += "img_dim " + std::to_string(data.img_dim) + "\n";
  for (const Persona& p : data.personas) {
    out += "persona " + std::to_string(p.id) + " " + JoinTokens(p.name) + " " +
           text::JoinInts<int>(std::span<const int>(p.attributes.data(), kNumSlots)) + " " +
           text::JoinDoubles(p.canonical_feature) + "\n";
  }
  for (const auto& [name, pool] : data.reference_pools) {
    for (const ImageFeature& img : pool) {
      out += "pool " + name + " " + std::string(ImageCategoryName(img.category)) + " " +
             text::JoinDoubles(img.z) + "\n";
    }
  }
  for (const TokenSeq& r : data.idk_pool.responses) out += "idk " + JoinTokens(r) + "\n";
  for (SplitTag tag : {SplitTag::kForget, SplitTag::kRetain, SplitTag::kGeneralization}) {
    for (const Triple& t : data.Split(tag)) {
      std::string mask;
      for (bool b : t.key_mask) mask.push_back(b ? '1' : '0');
      if (mask.empty()) mask = "-";
      out += "triple\t" + std::to_string(t.id) + "\t" + std::string(SplitName(tag)) + "\t" +
             std::to_string(t.persona_id) + "\t" + text::JoinDoubles(t.image.z, ',') + "\t" +
             JoinTokens(t.question) + "\t" + JoinTokens(t.answer) + "\t" + mask + "\n";
    }
  }
  out += "end\n";
  text::WriteFile(path, out);
}

DatasetSplit LoadDataset(const std::filesystem::path& path) {
  const std::string contents = text::ReadFile(path);
  if (contents.empty()) throw ParseError("dataset file '" + path.string() + "' is empty");
  const std::vector<std::string> lines = text::Split(contents, '\n');
  if (lines[0] != kDatasetHeader) {
    throw ParseError("'" + path.string() + "' is not a dataset file");
  }
  DatasetSplit data;
  data.reference_pools.clear();
  bool saw_end = false;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(li + 1) + ")";
    if (line == "end") {
      saw_end = true;
      break;
    }
    if (line.rfind("triple\t", 0) == 0) {
      const std::vector<std::string> f = text::Split(line, '\t');
      if (f.size() != 8) throw ParseError("triple line needs 8 fields" + where);
      Triple t;
      t.id = text::ParseInt(f[1]);
      const SplitTag tag = ParseSplit(f[2]);
      t.persona_id = static_cast<int>(text::ParseInt(f[3]));
      t.image.z = ParseDoubles(text::Split(f[4], ','), 0);
      t.question = ParseTokens(f[5]);
      t.answer = ParseTokens(f[6]);
      if (f[7] != "-") {
        for (char c : f[7]) {
          if (c != '0' && c != '1') throw ParseError("malformed key mask" + where);
          t.key_mask.push_back(c == '1');
        }
      }
      switch (tag) {
        case SplitTag::kForget: data.forget.push_back(std::move(t)); break;
        case SplitTag::kRetain: data.retain.push_back(std::move(t)); break;
        case SplitTag::kGeneralization: data.generalization.push_back(std::move(t)); break;
      }
      continue;
    }
    const std::vector<std::string> cells = text::SplitWhitespace(line);
    const std::string& kind = cells[0];
    if (kind == "vocab_size" && cells.size() == 2) {
      data.vocab_size = static_cast<int>(text::ParseInt(cells[1]));
    } else if (kind == "img_dim" && cells.size() == 2) {
      data.img_dim = static_cast<int>(text::ParseInt(cells[1]));
    } else if (kind == "persona" && cells.size() >= 2 + 2 + kNumSlots + 1) {
      Persona p;
      p.id = static_cast<int>(text::ParseInt(cells[1]));
      p.name = {static_cast<TokenId>(text::ParseInt(cells[2])),
                static_cast<TokenId>(text::ParseInt(cells[3]))};
      for (int s = 0; s < kNumSlots; ++s) {
        p.attributes[s] = static_cast<TokenId>(text::ParseInt(cells[4 + s]));
      }
      p.canonical_feature = ParseDoubles(cells, 4 + kNumSlots);
      data.personas.push_back(std::move(p));
    } else if (kind == "pool" && cells.size() >= 4) {
      data.reference_pools[cells[1]].push_back(
          {ParseDoubles(cells, 3), ParseImageCategory(cells[2])});
    } else if (kind == "idk" && cells.size() >= 2) {
      TokenSeq r;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        r.push_back(static_cast<TokenId>(text::ParseInt(cells[i])));
      }
      data.idk_pool.responses.push_back(std::move(r));
    } else {
      throw ParseError("malformed dataset line" + where);
    }
  }
  if (!saw_end) throw ParseError("truncated dataset file (missing end marker)");
  if (data.forget.empty() && data.retain.empty() && data.generalization.empty()) {
    throw ParseError("dataset file contains no triples");
  }
  data.Validate();
  return data;
}

std::vector<McItem> MultipleChoiceItems(std::span<const Triple> triples, int vocab_size,
                                        int num_distractors, std::uint64_t seed) {
  if (num_distractors < 0 || num_distractors > kValuesPerSlot - 1) {
    throw ValidationError("num_distractors must lie in [0, " +
                          std::to_string(kValuesPerSlot - 1) + "]");
  }
  std::mt19937_64 rng(seed);
  std::vector<McItem> items;
  for (const Triple& t : triples) {
    const auto key = std::find(t.key_mask.begin(), t.key_mask.end(), true);
    if (key == t.key_mask.end()) {
      throw ValidationError("triple " + std::to_string(t.id) + " has no key position");
    }
    const std::size_t pos = key - t.key_mask.begin();
    const int slot = vocab::SlotOfToken(vocab_size, t.answer[pos]);
    if (slot < 0) throw ValidationError("key position does not hold an attribute token");
    std::vector<TokenId> others;
    for (int v = 0; v < kValuesPerSlot; ++v) {
      const TokenId tok = vocab::AttributeToken(vocab_size, slot, v);
      if (tok != t.answer[pos]) others.push_back(tok);
    }
    std::shuffle(others.begin(), others.end(), rng);
    McItem item;
    item.triple = &t;
    item.candidates.push_back(t.answer);
    for (int d = 0; d < num_distractors; ++d) {
      TokenSeq alt = t.answer;
      alt[pos] = others[d];
      item.candidates.push_back(std::move(alt));
    }
    std::uniform_int_distribution<std::size_t> slot_pick(0, item.candidates.size() - 1);
    item.correct_index = slot_pick(rng);
    std::swap(item.candidates[0], item.candidates[item.correct_index]);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace unlearnlab
