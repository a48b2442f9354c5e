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

#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "unlearnlab/checkpoint.h"
#include "unlearnlab/data_synth.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/gradient_check.h"
#include "unlearnlab/losses.h"
#include "unlearnlab/metrics.h"
#include "unlearnlab/reference.h"
#include "unlearnlab/text_format.h"
#include "unlearnlab/token_analysis.h"
#include "unlearnlab/trainer.h"

namespace unlearnlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

void Log(const std::string& msg) { std::cerr << "unlearnlab: " << msg << "\n"; }
void Warn(const std::string& msg) { std::cerr << "unlearnlab: warning: " << msg << "\n"; }

fs::path OutDir(const std::string& out) {
  if (out.empty()) throw ValidationError("--out is required");
  return fs::path(out);
}

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " path is required");
  if (!fs::is_regular_file(path)) throw ValidationError(what + " '" + path + "' not found");
}

std::string FileHash(const std::string& path) {
  return text::HexDigest(text::Fnv1a(text::ReadFile(path)));
}

void WriteTiming(const fs::path& out, const std::string& command, Clock::time_point start,
                 const json& extra = json::object()) {
  json j;
  j["command"] = command;
  j["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  text::WriteFile(out / "timing.json", j.dump(2) + "\n");
}

DatasetSplit LoadData(const std::string& path) {
  RequireFile(path, "dataset");
  return LoadDataset(path);
}

Checkpoint LoadModel(const std::string& path, const DatasetSplit& data, const std::string& what) {
  RequireFile(path, what);
  Checkpoint ckpt = LoadCheckpoint(path);
  const ModelConfig& c = ckpt.params.config;
  if (c.vocab_size != data.vocab_size || c.img_dim != data.img_dim) {
    throw ConfigMismatchError(what + " '" + path + "' has vocab_size=" +
                              std::to_string(c.vocab_size) + ", img_dim=" +
                              std::to_string(c.img_dim) + " but the dataset has vocab_size=" +
                              std::to_string(data.vocab_size) +
                              ", img_dim=" + std::to_string(data.img_dim));
  }
  return ckpt;
}

std::string ReferenceSetId(const ReferenceSet& set) {
  std::string blob;
  for (const ImageFeature& img : set.images) blob += text::JoinDoubles(img.z) + "\n";
  return std::string(ReferenceCategoryName(set.category)) + "-" +
         text::HexDigest(text::Fnv1a(blob));
}

// Reference distributions for `triples`, reusing a cache file keyed by the
// model checksum, reference set and k when one covers every triple.
ReferenceMap CachedReferences(const ModelParams& params_full, const ReferenceSet& set,
                              std::span<const Triple> triples, const fs::path& out) {
  const char* env = std::getenv(kCacheDirEnv);
  const fs::path dir = env != nullptr && *env != '\0' ? fs::path(env) : out / "ref_cache";
  const fs::path file = dir / ("refs-" + ParamsChecksum(params_full) + "-" +
                               ReferenceSetId(set) + "-k" +
                               std::to_string(set.images.size()) + ".txt");
  if (fs::is_regular_file(file)) {
    ReferenceMap cached = LoadReferences(file);
    const bool covers = std::all_of(triples.begin(), triples.end(), [&](const Triple& t) {
      const auto it = cached.find(t.id);
      return it != cached.end() && it->second.size() == t.answer.size();
    });
    if (covers) {
      Log("reference cache hit: " + file.string());
      return cached;
    }
  }
  ReferenceMap refs = EstimateReferences(params_full, set, triples);
  SaveReferences(file, refs);
  Log("reference cache written: " + file.string());
  return refs;
}

std::vector<Triple> SampleTriples(std::span<const Triple> split, int n, std::uint64_t seed) {
  std::vector<std::size_t> order(split.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n)));
  std::sort(order.begin(), order.end());
  std::vector<Triple> out;
  for (std::size_t i : order) out.push_back(split[i]);
  return out;
}

double SampleStd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

int RunSynth(const SynthOptions& o) {
  const auto start = Clock::now();
  BenchmarkSpec spec;
  if (!o.spec_path.empty()) {
    RequireFile(o.spec_path, "spec");
    spec = BenchmarkSpec::FromText(text::ReadFile(o.spec_path));
  }
  if (o.seed) spec.seed = *o.seed;
  if (o.forget_fraction) spec.forget_fraction = *o.forget_fraction;
  spec.Validate();
  const fs::path out = OutDir(o.out);

  const DatasetSplit data = GenerateBenchmark(spec);
  data.Validate();
  SaveDataset(out / "dataset.txt", data);
  const std::string hash = FileHash((out / "dataset.txt").string());
  text::WriteFile(out / "manifest.txt",
                  spec.ToText() + "dataset_hash " + hash + "\n" + "num_forget_personas " +
                      std::to_string(spec.NumForgetPersonas()) + "\n");
  WriteTiming(out, "synth", start);
  Log("wrote " + std::to_string(data.forget.size()) + " forget, " +
      std::to_string(data.retain.size()) + " retain, " +
      std::to_string(data.generalization.size()) + " generalization triples to " +
      out.string());
  return kExitOk;
}

int RunTrain(const TrainOptions& o) {
  const auto start = Clock::now();
  const fs::path out = OutDir(o.out);
  const DatasetSplit data = LoadData(o.data);
  const std::string dataset_hash = FileHash(o.data);
  ModelConfig mc;
  mc.vocab_size = data.vocab_size;
  mc.img_dim = data.img_dim;
  mc.hidden_dim = o.hidden_dim;
  mc.max_positions = o.max_positions;
  mc.Validate();
  const std::vector<Triple> full_set = data.Full();
  for (const Triple& t : full_set) ValidateTriple(mc, t);

  BenchmarkSpec corpus_spec;
  corpus_spec.vocab_size = data.vocab_size;
  corpus_spec.img_dim = data.img_dim;
  corpus_spec.n_personas = static_cast<int>(data.personas.size());
  corpus_spec.seed = o.seed;
  const std::vector<Triple> corpus = GeneratePretrainingCorpus(corpus_spec);

  TrainConfig pretrain;
  pretrain.max_steps = o.pretrain_steps;
  pretrain.convergence_prob = 0.0;
  pretrain.adam.learning_rate = o.learning_rate;
  pretrain.seed = o.seed;
  TrainConfig finetune;
  finetune.max_steps = o.max_steps;
  finetune.adam.learning_rate = o.learning_rate;
  finetune.seed = o.seed;
  pretrain.Validate();
  finetune.Validate();

  TrainResult origin = TrainFull(InitParams(mc, o.seed), corpus, pretrain, nullptr, "pretrain");
  Log("origin model: " + std::to_string(origin.record.steps) + " pretraining steps");
  TrainResult full = TrainFull(origin.params, full_set, finetune);
  const TokenProbabilityStats stats = AnswerTokenStats(full.params, full_set);
  Log("full model: " + std::to_string(full.record.steps) + " steps, min token prob " +
      text::FormatDouble(stats.min));
  if (!full.record.converged) {
    Warn("full model did not reach the convergence threshold within --max-steps");
  }

  origin.record.checkpoint_path = "origin.ckpt";
  full.record.checkpoint_path = "full.ckpt";
  Checkpoint origin_ckpt{origin.params, std::nullopt,
                         {{"kind", "origin"}, {"seed", std::to_string(o.seed)},
                          {"dataset_hash", dataset_hash},
                          {"steps", std::to_string(origin.record.steps)}}};
  Checkpoint full_ckpt{full.params, full.optimizer,
                       {{"kind", "full"}, {"seed", std::to_string(o.seed)},
                        {"dataset_hash", dataset_hash},
                        {"steps", std::to_string(full.record.steps)},
                        {"converged", full.record.converged ? "1" : "0"},
                        {"min_token_prob", text::FormatDouble(stats.min)}}};
  SaveCheckpoint(out / "origin.ckpt", origin_ckpt);
  SaveCheckpoint(out / "full.ckpt", full_ckpt);
  text::WriteFile(out / "pretrain_run.json", origin.record.ToJson());
  text::WriteFile(out / "train_run.json", full.record.ToJson());
  WriteTiming(out, "train", start,
              {{"pretrain_seconds", origin.record.wall_clock_seconds},
               {"train_seconds", full.record.wall_clock_seconds}});
  return kExitOk;
}

int RunUnlearn(const UnlearnOptions& o) {
  const auto start = Clock::now();
  UnlearnConfig cfg;
  cfg.method = ParseMethod(o.method);
  const bool is_viker = cfg.method == Method::kViKeR;
  const bool uses_beta = cfg.method == Method::kNPO || cfg.method == Method::kIdkPO;
  if (!is_viker) {
    if (o.lambda) Warn("--lambda is ignored for --method " + o.method);
    if (o.k) Warn("--k is ignored for --method " + o.method);
    if (o.reg) Warn("--reg is ignored for --method " + o.method);
  }
  if (!uses_beta && o.beta) Warn("--beta is ignored for --method " + o.method);
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.k) cfg.k = *o.k;
  if (o.beta) cfg.beta = *o.beta;
  if (o.reg) cfg.regularizer = ParseDivergence(*o.reg);
  cfg.reference_category = ParseReferenceCategory(o.refs);
  cfg.steps = o.steps;
  cfg.seed = o.seed;
  cfg.learning_rate = o.learning_rate;
  cfg.Validate();
  const fs::path out = OutDir(o.out);

  const DatasetSplit data = LoadData(o.data);
  const std::string dataset_hash = FileHash(o.data);
  const Checkpoint full = LoadModel(o.checkpoint, data, "checkpoint");
  std::optional<ResumeState> resume;
  if (!o.resume.empty()) {
    RequireFile(o.resume, "resume checkpoint");
    Checkpoint partial = LoadCheckpoint(o.resume, full.params.config);
    if (!partial.optimizer) {
      throw ValidationError("resume checkpoint '" + o.resume + "' has no optimizer state");
    }
    resume = ResumeState{partial.params, *partial.optimizer};
  }
  std::optional<ReferenceSet> ref_set;
  if (is_viker) ref_set = SelectReferenceSet(data, cfg.reference_category, cfg.k);

  ReferenceMap refs;
  if (is_viker) refs = CachedReferences(full.params, *ref_set, data.forget, out);
  TrainResult result = Unlearn(full.params, data.forget, cfg, is_viker ? &refs : nullptr,
                               &data.idk_pool, resume ? &*resume : nullptr);
  result.record.checkpoint_path = "unlearned.ckpt";
  result.record.config["dataset_hash"] = dataset_hash;
  result.record.config["full_checkpoint_checksum"] = ParamsChecksum(full.params);

  Checkpoint ckpt{result.params, result.optimizer,
                  {{"kind", "unlearned"}, {"method", std::string(MethodName(cfg.method))},
                   {"seed", std::to_string(cfg.seed)}, {"dataset_hash", dataset_hash},
                   {"steps", std::to_string(result.record.steps)}}};
  SaveCheckpoint(out / "unlearned.ckpt", ckpt);
  text::WriteFile(out / "run.json", result.record.ToJson());
  text::WriteFile(out / "unlearn_config.txt", cfg.ToText());
  WriteTiming(out, "unlearn", start, {{"unlearn_seconds", result.record.wall_clock_seconds}});
  Log(std::string(MethodName(cfg.method)) + ": " + std::to_string(result.record.steps) +
      " steps, final loss " + text::FormatDouble(result.record.loss_trace.empty()
                                                     ? 0.0
                                                     : result.record.loss_trace.back()));
  return kExitOk;
}

int RunRefdist(const RefdistOptions& o) {
  const auto start = Clock::now();
  const fs::path out = OutDir(o.out);
  const DatasetSplit data = LoadData(o.data);
  const Checkpoint ckpt = LoadModel(o.checkpoint, data, "checkpoint");
  const ReferenceSet set = SelectReferenceSet(data, ParseReferenceCategory(o.refs), o.k);
  const std::vector<Triple>& triples = data.Split(ParseSplit(o.split));
  const ReferenceMap refs = EstimateReferences(ckpt.params, set, triples);
  SaveReferences(out / "references.txt", refs);
  WriteTiming(out, "refdist", start);
  Log("wrote reference distributions for " + std::to_string(refs.size()) + " triples");
  return kExitOk;
}

int RunEval(const EvalOptions& o) {
  const auto start = Clock::now();
  const fs::path out = OutDir(o.out);
  const DatasetSplit data = LoadData(o.data);
  const Checkpoint ckpt = LoadModel(o.checkpoint, data, "checkpoint");
  const Checkpoint origin = LoadModel(o.origin, data, "origin checkpoint");
  if (!(origin.params.config == ckpt.params.config)) {
    throw ConfigMismatchError("origin and evaluated checkpoints have different configs");
  }

  std::vector<MetricReport> reports;
  std::vector<Generation> generations;
  for (SplitTag tag : {SplitTag::kForget, SplitTag::kGeneralization, SplitTag::kRetain}) {
    reports.push_back(EvaluateSplit(ckpt.params, origin.params, data, tag, {}, &generations));
  }
  text::WriteFile(out / "metrics.csv", MetricReportsToCsv(reports));
  text::WriteFile(out / "metrics.txt",
                  MetricReportsToTable(reports) + "# bleu max_n 4, no smoothing\n");
  std::string gen = "triple_id\tsplit\tgenerated\treference\n";
  for (const Generation& g : generations) {
    gen += std::to_string(g.triple_id) + "\t" + g.split + "\t" +
           text::JoinInts<TokenId>(g.generated) + "\t" + text::JoinInts<TokenId>(g.reference) +
           "\n";
  }
  text::WriteFile(out / "generations.tsv", gen);

  const auto meta = [&](const char* key, const std::string& fallback) {
    const auto it = ckpt.meta.find(key);
    return it == ckpt.meta.end() ? fallback : it->second;
  };
  text::KeyValues manifest = {
      {"method", meta("method", meta("kind", "unknown"))},
      {"seed", meta("seed", "unknown")},
      {"dataset_hash", FileHash(o.data)},
      {"checkpoint_checksum", ParamsChecksum(ckpt.params)},
      {"origin_checksum", ParamsChecksum(origin.params)},
  };
  text::WriteFile(out / "eval_manifest.txt", text::FormatKeyValues(manifest));
  WriteTiming(out, "eval", start);
  std::cout << MetricReportsToTable(reports);
  return kExitOk;
}

int RunVerifyGrad(const VerifyGradOptions& o) {
  const auto start = Clock::now();
  if (o.num_triples < 1) throw ValidationError("--num-triples must be >= 1");
  if (!(o.lambda >= 0.0)) throw ValidationError("--lambda must be >= 0");
  const fs::path out = OutDir(o.out);
  const DatasetSplit data = LoadData(o.data);
  const Checkpoint ckpt = LoadModel(o.checkpoint, data, "checkpoint");
  const ModelParams& params = ckpt.params;
  const ReferenceSet set = SelectReferenceSet(data, ParseReferenceCategory(o.refs), o.k);
  const std::vector<Triple> triples = SampleTriples(data.forget, o.num_triples, o.seed);
  if (triples.empty()) throw ValidationError("dataset has no forget triples");
  for (const Triple& t : triples) ValidateTriple(params.config, t);
  const ReferenceMap refs = EstimateReferences(params, set, triples);
  const auto assignment = AssignIdkResponses(triples, data.idk_pool, o.seed);

  const auto corrupt = [](GradientVector& g) {
    g.ForEach([](std::string_view, std::span<double> v) {
      for (double& x : v) x += 1e-3;
    });
  };
  bool all_pass = true;

  // The frozen model for NPO/IdkPO is the checkpoint itself.
  // Trained checkpoints have sharp softmaxes; below 1e-5 the double-precision
  // central difference is dominated by roundoff.
  GradientCheckOptions fd_options;
  fd_options.min_magnitude = 1e-5;
  if (o.perturb) fd_options.analytic_hook = corrupt;
  json fd = json::array();
  for (const NamedLoss& loss :
       StandardLosses(params, refs, o.lambda, data.idk_pool, assignment, 0.4)) {
    const GradientCheckResult r = CheckGradient(params, loss, triples, fd_options);
    all_pass = all_pass && r.pass;
    fd.push_back({{"loss", r.loss},
                  {"max_rel_error", r.max_rel_error},
                  {"max_abs_error", r.max_abs_error},
                  {"num_checked", r.num_checked},
                  {"num_components", r.num_components},
                  {"tolerance", fd_options.rel_tolerance},
                  {"min_magnitude", fd_options.min_magnitude},
                  {"pass", r.pass}});
    std::cout << "finite_difference " << r.loss << " max_rel_error "
              << text::FormatDouble(r.max_rel_error) << (r.pass ? " PASS" : " FAIL") << "\n";
  }

  VerifyOptions verify_options;
  if (o.perturb) verify_options.direct_gradient_hook = corrupt;
  json identities = json::object();
  const auto summarize = [&](const std::string& name, const std::vector<ReweightReport>& rs) {
    double worst = 0.0;
    bool pass = true;
    json list = json::array();
    for (const ReweightReport& r : rs) {
      worst = std::max(worst, r.max_discrepancy);
      pass = pass && r.pass;
      list.push_back(json::parse(ReweightReportToJson(r)));
    }
    all_pass = all_pass && pass;
    identities[name] = {{"max_discrepancy", worst},
                        {"tolerance", rs.empty() ? 0.0 : rs.front().tolerance},
                        {"pass", pass},
                        {"reports", list}};
    std::cout << name << " max_discrepancy " << text::FormatDouble(worst)
              << (pass ? " PASS" : " FAIL") << "\n";
  };
  std::vector<ReweightReport> reweighted;
  std::vector<ReweightReport> scaling;
  for (const Triple& t : triples) {
    reweighted.push_back(
        VerifyReweightedGradient(params, t, refs.at(t.id), o.lambda, verify_options));
    for (int pos = 1; pos <= static_cast<int>(t.answer.size()); ++pos) {
      for (double lam : {0.0, o.lambda, 1.0}) {
        scaling.push_back(VerifyNormalTokenScaling(params, t, pos, lam, verify_options));
      }
    }
  }
  summarize("reweighted_gradient", reweighted);
  summarize("normal_token_scaling", scaling);

  json report;
  report["checkpoint_checksum"] = ParamsChecksum(params);
  report["lambda"] = o.lambda;
  report["k"] = o.k;
  json ids = json::array();
  for (const Triple& t : triples) ids.push_back(t.id);
  report["triple_ids"] = ids;
  report["finite_difference"] = fd;
  report["identities"] = identities;
  report["pass"] = all_pass;
  text::WriteFile(out / "verify_report.json", report.dump(2) + "\n");
  WriteTiming(out, "verify-grad", start);
  std::cout << (all_pass ? "all checks passed" : "verification FAILED") << "\n";
  return all_pass ? kExitOk : kExitVerification;
}

int RunDumpDist(const DumpDistOptions& o) {
  const auto start = Clock::now();
  const fs::path out = OutDir(o.out);
  const DatasetSplit data = LoadData(o.data);
  const Checkpoint ckpt = LoadModel(o.checkpoint, data, "checkpoint");
  const Triple& triple = data.TripleById(o.triple);
  ValidateTriple(ckpt.params.config, triple);
  const ReferenceSet set = SelectReferenceSet(data, ParseReferenceCategory(o.refs), o.k);
  const ReferenceDistributions refs = EstimateReference(ckpt.params, set, triple);
  const auto acts = ForwardAnswer(ckpt.params, triple.image, triple.question, triple.answer);
  const std::vector<TokenClassification> classes = ClassifyTokens(refs, triple.answer);

  std::string csv = "table,position,token,token_prob,entropy,is_normal,is_key";
  for (int v = 0; v < data.vocab_size; ++v) csv += ",p" + std::to_string(v);
  csv += "\n";
  const auto rows = [&](const std::string& table, auto dist_at) {
    for (std::size_t i = 0; i < triple.answer.size(); ++i) {
      const TokenDistribution& d = dist_at(i);
      const TokenClassification& c = classes[i];
      csv += table + "," + std::to_string(i + 1) + "," + std::to_string(triple.answer[i]) +
             "," + text::FormatDouble(d.probs[triple.answer[i]]) + "," +
             text::FormatDouble(Entropy(d)) + "," + (c.is_normal ? "1" : "0") + "," +
             (c.is_key ? "1" : "0");
      for (double p : d.probs) csv += "," + text::FormatDouble(p);
      csv += "\n";
    }
  };
  rows("model", [&](std::size_t i) -> const TokenDistribution& { return acts[i].dist; });
  rows("reference", [&](std::size_t i) -> const TokenDistribution& { return refs.at(i); });
  text::WriteFile(out / ("dist_" + std::to_string(o.triple) + ".csv"), csv);
  WriteTiming(out, "dump-dist", start);
  return kExitOk;
}

int RunReport(const ReportOptions& o) {
  const auto start = Clock::now();
  const fs::path out = OutDir(o.out);
  if (o.runs.empty() || !fs::is_directory(o.runs)) {
    throw ValidationError("--runs directory '" + o.runs + "' not found");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(o.runs)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "metrics.csv") &&
        fs::is_regular_file(entry.path() / "eval_manifest.txt")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw ValidationError("no evaluated runs under '" + o.runs + "'");

  // method -> split -> metric -> per-run means, in first-seen split/metric order.
  std::map<std::string, std::vector<std::vector<MetricReport>>> by_method;
  std::string dataset_hash;
  for (const fs::path& dir : dirs) {
    const text::KeyValues manifest =
        text::ParseKeyValues(text::ReadFile(dir / "eval_manifest.txt"));
    const auto hash = manifest.find("dataset_hash");
    const auto method = manifest.find("method");
    if (hash == manifest.end() || method == manifest.end()) {
      throw ParseError("incomplete eval manifest in '" + dir.string() + "'");
    }
    if (dataset_hash.empty()) {
      dataset_hash = hash->second;
    } else if (dataset_hash != hash->second) {
      throw ValidationError("run '" + dir.string() + "' was evaluated on a different dataset (" +
                            hash->second + " vs " + dataset_hash + ")");
    }
    by_method[method->second].push_back(
        MetricReportsFromCsv(text::ReadFile(dir / "metrics.csv")));
  }

  std::string csv = "method,split,metric,mean,std,n_runs\n";
  std::string table;
  char buf[96];
  for (const auto& [method, runs] : by_method) {
    table += method + " (" + std::to_string(runs.size()) + " runs)\n";
    for (std::size_t s = 0; s < runs.front().size(); ++s) {
      const MetricReport& first = runs.front()[s];
      std::snprintf(buf, sizeof(buf), "  %-16s", first.split.c_str());
      table += buf;
      for (const MetricSummary& m : first.metrics) {
        std::vector<double> values;
        for (const auto& run : runs) {
          if (run.size() <= s || run[s].split != first.split) {
            throw ValidationError("runs for method '" + method + "' report different splits");
          }
          values.push_back(run[s].Get(m.metric).mean);
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        const double sd = SampleStd(values, mean);
        csv += method + "," + first.split + "," + m.metric + "," + text::FormatDouble(mean) +
               "," + text::FormatDouble(sd) + "," + std::to_string(values.size()) + "\n";
        std::snprintf(buf, sizeof(buf), " %s %8.4f +- %6.4f", m.metric.c_str(), mean, sd);
        table += buf;
      }
      table += "\n";
    }
  }
  table += "# coherence is the mean per-token log-probability under the origin model\n";
  text::WriteFile(out / "report.csv", csv);
  text::WriteFile(out / "report.txt", table);
  WriteTiming(out, "report", start);
  std::cout << table;
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"unlearnlab: visual-guided token-level unlearning on a toy model"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic benchmark");
  c_synth->add_option("--spec", synth.spec_path, "Benchmark spec (key-value file)");
  auto* spec_opt = c_synth->get_option("--spec");
  c_synth->add_flag("--defaults", "Use the default spec (same as omitting --spec)")
      ->excludes(spec_opt);
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Override the spec seed");
  c_synth->add_option("--forget-fraction", synth.forget_fraction, "Override forget_fraction");

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Pretrain the origin model and fine-tune the full model");
  c_train->add_option("--data", train.data, "Dataset file")->required();
  c_train->add_option("--out", train.out, "Output directory")->required();
  c_train->add_option("--seed", train.seed, "Seed");
  c_train->add_option("--hidden-dim", train.hidden_dim, "Hidden width");
  c_train->add_option("--max-positions", train.max_positions, "Maximum answer length");
  c_train->add_option("--pretrain-steps", train.pretrain_steps, "Origin pretraining steps");
  c_train->add_option("--max-steps", train.max_steps, "Fine-tuning step cap");
  c_train->add_option("--lr", train.learning_rate, "Learning rate");

  UnlearnOptions unlearn;
  auto* c_unlearn = app.add_subcommand("unlearn", "Run an unlearning method on the forget set");
  c_unlearn->add_option("--method", unlearn.method, "ga | npo | idkpo | viker");
  c_unlearn->add_option("--lambda", unlearn.lambda, "Regularizer weight (viker)");
  c_unlearn->add_option("--k", unlearn.k, "Reference images (viker)");
  c_unlearn->add_option("--beta", unlearn.beta, "Inverse temperature (npo, idkpo)");
  c_unlearn->add_option("--reg", unlearn.reg, "kl | jsd | cos (viker)");
  c_unlearn->add_option("--refs", unlearn.refs, "Reference pool: people | pets | scene | pattern | forget | retain");
  c_unlearn->add_option("--checkpoint", unlearn.checkpoint, "Full-model checkpoint")->required();
  c_unlearn->add_option("--data", unlearn.data, "Dataset file")->required();
  c_unlearn->add_option("--resume", unlearn.resume, "Continue from a partial unlearned checkpoint");
  c_unlearn->add_option("--steps", unlearn.steps, "Total optimizer steps");
  c_unlearn->add_option("--seed", unlearn.seed, "Seed");
  c_unlearn->add_option("--lr", unlearn.learning_rate, "Learning rate");
  c_unlearn->add_option("--out", unlearn.out, "Output directory")->required();

  RefdistOptions refdist;
  auto* c_refdist = app.add_subcommand("refdist", "Estimate reference distributions");
  c_refdist->add_option("--checkpoint", refdist.checkpoint, "Full-model checkpoint")->required();
  c_refdist->add_option("--data", refdist.data, "Dataset file")->required();
  c_refdist->add_option("--refs", refdist.refs, "Reference pool");
  c_refdist->add_option("--k", refdist.k, "Reference images");
  c_refdist->add_option("--split", refdist.split, "forget | retain | generalization");
  c_refdist->add_option("--out", refdist.out, "Output directory")->required();

  EvalOptions eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint on every split");
  c_eval->add_option("--checkpoint", eval.checkpoint, "Checkpoint to evaluate")->required();
  c_eval->add_option("--origin", eval.origin, "Origin checkpoint (coherence proxy)")->required();
  c_eval->add_option("--data", eval.data, "Dataset file")->required();
  c_eval->add_option("--out", eval.out, "Output directory")->required();

  VerifyGradOptions verify;
  auto* c_verify = app.add_subcommand("verify-grad", "Check gradients and the reweighting identities");
  c_verify->add_option("--checkpoint", verify.checkpoint, "Checkpoint")->required();
  c_verify->add_option("--data", verify.data, "Dataset file")->required();
  c_verify->add_option("--lambda", verify.lambda, "Regularizer weight");
  c_verify->add_option("--k", verify.k, "Reference images");
  c_verify->add_option("--refs", verify.refs, "Reference pool");
  c_verify->add_option("--num-triples", verify.num_triples, "Sampled forget triples");
  c_verify->add_option("--seed", verify.seed, "Sampling seed");
  c_verify->add_option("--out", verify.out, "Output directory")->required();
  c_verify->add_flag("--perturb", verify.perturb, "Corrupt the analytic gradients")->group("");

  DumpDistOptions dump;
  auto* c_dump = app.add_subcommand("dump-dist", "Dump per-position token distributions as CSV");
  c_dump->add_option("--checkpoint", dump.checkpoint, "Checkpoint")->required();
  c_dump->add_option("--triple", dump.triple, "Triple id")->required();
  c_dump->add_option("--data", dump.data, "Dataset file")->required();
  c_dump->add_option("--refs", dump.refs, "Reference pool");
  c_dump->add_option("--k", dump.k, "Reference images");
  c_dump->add_option("--out", dump.out, "Output directory")->required();

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "Aggregate evaluated runs into mean/std tables");
  c_report->add_option("--runs", report.runs, "Directory of evaluated run directories")->required();
  c_report->add_option("--out", report.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*c_synth) return RunSynth(synth);
    if (*c_train) return RunTrain(train);
    if (*c_unlearn) return RunUnlearn(unlearn);
    if (*c_refdist) return RunRefdist(refdist);
    if (*c_eval) return RunEval(eval);
    if (*c_verify) return RunVerifyGrad(verify);
    if (*c_dump) return RunDumpDist(dump);
    if (*c_report) return RunReport(report);
  } catch (const std::exception& e) {
    std::cerr << "unlearnlab: error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace unlearnlab::cli
