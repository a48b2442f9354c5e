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

#ifndef UNLEARNLAB_METRICS_H_
#define UNLEARNLAB_METRICS_H_

#include <span>
#include <string>
#include <vector>

#include "unlearnlab/data_synth.h"
#include "unlearnlab/model.h"

namespace unlearnlab {

// LCS-based F-measure. Throws ValidationError on empty input.
double RougeL(std::span<const TokenId> generated, std::span<const TokenId> reference);

// Unsmoothed BLEU: brevity penalty times the geometric mean of clipped
// n-gram precisions for n = 1..max_n. Any zero precision (including
// generations shorter than max_n) gives 0.
double Bleu(std::span<const TokenId> generated, std::span<const TokenId> reference,
            int max_n = 4);

// True iff `name` occurs contiguously in `generated`.
bool ContainsName(std::span<const TokenId> generated, std::span<const TokenId> name);

// Fraction of items whose highest-likelihood candidate is the true answer;
// ties go to the lowest candidate index.
double MultipleChoiceAccuracy(const ModelParams& params, std::span<const McItem> items);

// Mean per-token log-probability of `generated` under the origin model,
// teacher-forced on its own prefixes. Higher is more template-like.
double CoherenceProxy(const ModelParams& params_origin, const ImageFeature& image,
                      std::span<const TokenId> question, std::span<const TokenId> generated);

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for n < 2
  int n = 0;
};

struct MetricReport {
  std::string split;
  std::vector<MetricSummary> metrics;
  const MetricSummary& Get(const std::string& metric) const;
};

struct Generation {
  TripleId triple_id = 0;
  std::string split;
  TokenSeq generated;
  TokenSeq reference;
};

struct EvaluationOptions {
  int num_distractors = 3;
  std::uint64_t mc_seed = 17;
  int max_decode_len = 0;  // 0 = max_positions
};

// Metric names in report order.
const std::vector<std::string>& MetricNames();

MetricReport EvaluateSplit(const ModelParams& params, const ModelParams& params_origin,
                           const DatasetSplit& data, SplitTag split,
                           const EvaluationOptions& options = {},
                           std::vector<Generation>* generations = nullptr);

std::string MetricReportsToCsv(std::span<const MetricReport> reports);
std::vector<MetricReport> MetricReportsFromCsv(const std::string& csv);
// Split rows by metric columns.
std::string MetricReportsToTable(std::span<const MetricReport> reports);

// Strips a trailing end token.
TokenSeq StripEnd(std::span<const TokenId> seq, TokenId end_token);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_METRICS_H_
