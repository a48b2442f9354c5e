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

#include "unlearnlab/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

namespace {

std::size_t LcsLength(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::map<std::vector<TokenId>, int> NgramCounts(std::span<const TokenId> seq, int n) {
  std::map<std::vector<TokenId>, int> counts;
  if (static_cast<int>(seq.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[std::vector<TokenId>(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

MetricSummary Summarize(const std::string& name, const std::vector<double>& values) {
  MetricSummary s;
  s.metric = name;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (values.size() - 1));
  }
  return s;
}

}  // namespace

double RougeL(std::span<const TokenId> generated, std::span<const TokenId> reference) {
  if (generated.empty() || reference.empty()) {
    throw ValidationError("ROUGE-L needs non-empty sequences");
  }
  // F1 of lcs/|g| and lcs/|r| reduces to one division, so the result is
  // correctly rounded.
  const std::size_t lcs = LcsLength(generated, reference);
  return static_cast<double>(2 * lcs) /
         static_cast<double>(generated.size() + reference.size());
}

double Bleu(std::span<const TokenId> generated, std::span<const TokenId> reference,
            int max_n) {
  if (generated.empty() || reference.empty()) {
    throw ValidationError("BLEU needs non-empty sequences");
  }
  if (max_n < 1) throw ValidationError("BLEU max_n must be >= 1");
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = NgramCounts(generated, n);
    const auto ref = NgramCounts(reference, n);
    int clipped = 0;
    int total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      const auto it = ref.find(gram);
      if (it != ref.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(static_cast<double>(clipped) / total);
  }
  const double brevity = std::min(
      1.0, std::exp(1.0 - static_cast<double>(reference.size()) / generated.size()));
  return brevity * std::exp(log_sum / max_n);
}

bool ContainsName(std::span<const TokenId> generated, std::span<const TokenId> name) {
  if (name.empty()) throw ValidationError("name must be non-empty");
  return std::search(generated.begin(), generated.end(), name.begin(), name.end()) !=
         generated.end();
}

double MultipleChoiceAccuracy(const ModelParams& params, std::span<const McItem> items) {
  if (items.empty()) throw ValidationError("no multiple-choice items");
  int correct = 0;
  for (const McItem& item : items) {
    if (item.candidates.empty()) throw ValidationError("multiple-choice item has no candidates");
    std::size_t best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < item.candidates.size(); ++c) {
      const double lp = SequenceLogProb(params, item.triple->image, item.triple->question,
                                        item.candidates[c]);
      if (lp > best_lp) {
        best_lp = lp;
        best = c;
      }
    }
    if (best == item.correct_index) ++correct;
  }
  return static_cast<double>(correct) / items.size();
}

double CoherenceProxy(const ModelParams& params_origin, const ImageFeature& image,
                      std::span<const TokenId> question, std::span<const TokenId> generated) {
  if (generated.empty()) throw ValidationError("coherence proxy of an empty generation");
  if (static_cast<int>(generated.size()) > params_origin.config.max_positions) {
    throw ValidationError("generation longer than max_positions");
  }
  return SequenceLogProb(params_origin, image, question, generated) / generated.size();
}

const MetricSummary& MetricReport::Get(const std::string& metric) const {
  for (const MetricSummary& m : metrics) {
    if (m.metric == metric) return m;
  }
  throw ValidationError("metric '" + metric + "' missing from report for " + split);
}

const std::vector<std::string>& MetricNames() {
  static const std::vector<std::string> kNames = {"acc", "rouge_l", "bleu", "rec",
                                                  "coherence"};
  return kNames;
}

TokenSeq StripEnd(std::span<const TokenId> seq, TokenId end_token) {
  TokenSeq out(seq.begin(), seq.end());
  if (!out.empty() && out.back() == end_token) out.pop_back();
  return out;
}

MetricReport EvaluateSplit(const ModelParams& params, const ModelParams& params_origin,
                           const DatasetSplit& data, SplitTag split,
                           const EvaluationOptions& options,
                           std::vector<Generation>* generations) {
  const std::vector<Triple>& triples = data.Split(split);
  if (triples.empty()) {
    throw ValidationError("split '" + std::string(SplitName(split)) + "' is empty");
  }
  const TokenId end = params.config.end_token();
  const int max_len =
      options.max_decode_len > 0 ? options.max_decode_len : params.config.max_positions;

  std::vector<double> rouge, bleu, rec, coherence;
  for (const Triple& t : triples) {
    const TokenSeq decoded = GreedyDecode(params, t.image, t.question, max_len);
    const TokenSeq gen = StripEnd(decoded, end);
    const TokenSeq ref = StripEnd(t.answer, end);
    // An immediate end token is an empty answer: zero overlap.
    rouge.push_back(gen.empty() ? 0.0 : RougeL(gen, ref));
    bleu.push_back(gen.empty() ? 0.0 : Bleu(gen, ref));
    const Persona& persona = data.PersonaById(t.persona_id);
    rec.push_back(ContainsName(decoded, persona.name) ? 1.0 : 0.0);
    coherence.push_back(CoherenceProxy(params_origin, t.image, t.question, decoded));
    if (generations != nullptr) {
      generations->push_back({t.id, std::string(SplitName(split)), decoded, t.answer});
    }
  }
  const std::vector<McItem> items =
      MultipleChoiceItems(triples, data.vocab_size, options.num_distractors, options.mc_seed);
  std::vector<double> acc;
  for (const McItem& item : items) {
    acc.push_back(MultipleChoiceAccuracy(params, std::span<const McItem>(&item, 1)));
  }

  MetricReport report;
  report.split = SplitName(split);
  report.metrics = {Summarize("acc", acc), Summarize("rouge_l", rouge),
                    Summarize("bleu", bleu), Summarize("rec", rec),
                    Summarize("coherence", coherence)};
  return report;
}

std::string MetricReportsToCsv(std::span<const MetricReport> reports) {
  std::string out = "split,metric,mean,std,n\n";
  for (const MetricReport& r : reports) {
    for (const MetricSummary& m : r.metrics) {
      out += r.split + "," + m.metric + "," + text::FormatDouble(m.mean) + "," +
             text::FormatDouble(m.stddev) + "," + std::to_string(m.n) + "\n";
    }
  }
  return out;
}

std::vector<MetricReport> MetricReportsFromCsv(const std::string& csv) {
  std::vector<MetricReport> out;
  const std::vector<std::string> lines = text::Split(csv, '\n');
  if (lines.empty() || lines[0] != "split,metric,mean,std,n") {
    throw ParseError("metrics CSV has an unexpected header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = text::Split(lines[i], ',');
    if (f.size() != 5) throw ParseError("metrics CSV row needs 5 fields");
    if (out.empty() || out.back().split != f[0]) out.push_back({f[0], {}});
    out.back().metrics.push_back({f[1], text::ParseDouble(f[2]), text::ParseDouble(f[3]),
                                  static_cast<int>(text::ParseInt(f[4]))});
  }
  return out;
}

std::string MetricReportsToTable(std::span<const MetricReport> reports) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s", "split");
  out += buf;
  for (const std::string& m : MetricNames()) {
    std::snprintf(buf, sizeof(buf), " %18s", m.c_str());
    out += buf;
  }
  out += "\n";
  for (const MetricReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-16s", r.split.c_str());
    out += buf;
    for (const std::string& name : MetricNames()) {
      const MetricSummary& m = r.Get(name);
      std::snprintf(buf, sizeof(buf), " %9.4f +- %6.4f", m.mean, m.stddev);
      out += buf;
    }
    out += "\n";
  }
  out += "# acc/rouge_l/bleu/rec are fractions; coherence is the mean per-token\n"
         "# log-probability (nats) of the decode under the origin model.\n";
  return out;
}

}  // namespace unlearnlab
