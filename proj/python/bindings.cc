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

// Python bindings for the unlearnlab core. Enums cross the boundary as their
// text names, the same spelling the CLI and file formats use.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>
#include <pybind11/stl_bind.h>

#include <optional>
#include <string>
#include <vector>

#include "unlearnlab/checkpoint.h"
#include "unlearnlab/data_synth.h"
#include "unlearnlab/errors.h"
#include "unlearnlab/losses.h"
#include "unlearnlab/metrics.h"
#include "unlearnlab/model.h"
#include "unlearnlab/reference.h"
#include "unlearnlab/token_analysis.h"
#include "unlearnlab/trainer.h"

PYBIND11_MAKE_OPAQUE(unlearnlab::ReferenceMap);

namespace py = pybind11;

namespace unlearnlab {
namespace {

std::vector<double> Probs(const TokenDistribution& d) { return d.probs; }

py::dict SummaryDict(const MetricReport& report) {
  py::dict out;
  for (const MetricSummary& m : report.metrics) out[py::str(m.metric)] = m.mean;
  return out;
}

void BindErrors(py::module_& m) {
  static py::exception<Error> base(m, "Error");
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<ParseError> parse(m, "ParseError", base.ptr());
  static py::exception<ConfigMismatchError> mismatch(m, "ConfigMismatchError", base.ptr());
  static py::exception<SimplexViolation> simplex(m, "SimplexViolation", base.ptr());
  static py::exception<NonFiniteLossError> non_finite(m, "NonFiniteLossError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      validation(e.what());
    } catch (const ParseError& e) {
      parse(e.what());
    } catch (const ConfigMismatchError& e) {
      mismatch(e.what());
    } catch (const SimplexViolation& e) {
      simplex(e.what());
    } catch (const NonFiniteLossError& e) {
      non_finite(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });
}

void BindModel(py::module_& m) {
  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("img_dim", &ModelConfig::img_dim)
      .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
      .def_readwrite("max_positions", &ModelConfig::max_positions)
      .def("validate", &ModelConfig::Validate)
      .def(py::self == py::self);

  py::class_<ModelParams>(m, "ModelParams")
      .def_readonly("config", &ModelParams::config)
      .def("num_values", &ModelParams::NumValues)
      .def("flatten", &ModelParams::Flatten)
      .def("checksum", [](const ModelParams& p) { return ParamsChecksum(p); })
      .def(py::self == py::self);

  m.def("init_params", &InitParams, py::arg("config"), py::arg("seed"));

  py::class_<ImageFeature>(m, "ImageFeature")
      .def_readonly("z", &ImageFeature::z)
      .def_property_readonly("category", [](const ImageFeature& f) {
        return std::string(ImageCategoryName(f.category));
      });

  py::class_<Triple>(m, "Triple")
      .def_readonly("id", &Triple::id)
      .def_readonly("persona_id", &Triple::persona_id)
      .def_readonly("image", &Triple::image)
      .def_readonly("question", &Triple::question)
      .def_readonly("answer", &Triple::answer)
      .def_readonly("key_mask", &Triple::key_mask);

  py::class_<TokenDistribution>(m, "TokenDistribution")
      .def_static("from_probs", &TokenDistribution::FromProbs)
      .def_static("from_logits",
                  [](const std::vector<double>& l) { return TokenDistribution::FromLogits(l); })
      .def_static("one_hot", &TokenDistribution::OneHot)
      .def_property_readonly("probs", &Probs);

  m.def("answer_log_prob", &AnswerLogProb);
  m.def("greedy_decode", [](const ModelParams& p, const Triple& t, int max_len) {
    return GreedyDecode(p, t.image, t.question, max_len);
  }, py::arg("params"), py::arg("triple"), py::arg("max_len") = 0);
}

void BindData(py::module_& m) {
  py::class_<BenchmarkSpec>(m, "BenchmarkSpec")
      .def(py::init<>())
      .def_readwrite("n_personas", &BenchmarkSpec::n_personas)
      .def_readwrite("images_per_persona", &BenchmarkSpec::images_per_persona)
      .def_readwrite("forget_fraction", &BenchmarkSpec::forget_fraction)
      .def_readwrite("feature_noise_sigma", &BenchmarkSpec::feature_noise_sigma)
      .def_readwrite("seed", &BenchmarkSpec::seed)
      .def_readwrite("vocab_size", &BenchmarkSpec::vocab_size)
      .def_readwrite("img_dim", &BenchmarkSpec::img_dim)
      .def_readwrite("reference_pool_size", &BenchmarkSpec::reference_pool_size)
      .def("validate", &BenchmarkSpec::Validate)
      .def("num_forget_personas", &BenchmarkSpec::NumForgetPersonas)
      .def("to_text", &BenchmarkSpec::ToText)
      .def_static("from_text", [](const std::string& s) { return BenchmarkSpec::FromText(s); });

  py::class_<IdkPool>(m, "IdkPool").def_readonly("responses", &IdkPool::responses);

  py::class_<DatasetSplit>(m, "DatasetSplit")
      .def_readonly("vocab_size", &DatasetSplit::vocab_size)
      .def_readonly("img_dim", &DatasetSplit::img_dim)
      .def_readonly("forget", &DatasetSplit::forget)
      .def_readonly("retain", &DatasetSplit::retain)
      .def_readonly("generalization", &DatasetSplit::generalization)
      .def_readonly("idk_pool", &DatasetSplit::idk_pool)
      .def("full", &DatasetSplit::Full)
      .def("validate", &DatasetSplit::Validate);

  m.def("generate_benchmark", &GenerateBenchmark);
  m.def("generate_pretraining_corpus", &GeneratePretrainingCorpus, py::arg("spec"),
        py::arg("num_images") = 16);
  m.def("save_dataset", &SaveDataset);
  m.def("load_dataset", &LoadDataset);
}

void BindReferences(py::module_& m) {
  py::class_<ReferenceSet>(m, "ReferenceSet")
      .def_readonly("images", &ReferenceSet::images)
      .def_property_readonly("category", [](const ReferenceSet& r) {
        return std::string(ReferenceCategoryName(r.category));
      });

  py::class_<ReferenceDistributions>(m, "ReferenceDistributions")
      .def_property_readonly("triple_id", &ReferenceDistributions::triple_id)
      .def_property_readonly("source_k", &ReferenceDistributions::source_k)
      .def("__len__", &ReferenceDistributions::size)
      .def("rows", [](const ReferenceDistributions& r) {
        std::vector<std::vector<double>> rows;
        for (const TokenDistribution& d : r.per_position()) rows.push_back(d.probs);
        return rows;
      });

  py::bind_map<ReferenceMap>(m, "ReferenceMap");

  m.def("select_reference_set", [](const DatasetSplit& data, const std::string& category,
                                   int k) {
    return SelectReferenceSet(data, ParseReferenceCategory(category), k);
  }, py::arg("data"), py::arg("category") = "people", py::arg("k") = 5);
  m.def("estimate_references", [](const ModelParams& full, const ReferenceSet& refs,
                                  const std::vector<Triple>& triples) {
    return EstimateReferences(full, refs, triples);
  });
  m.def("self_reference", &SelfReference);
  m.def("save_references", &SaveReferences);
  m.def("load_references", &LoadReferences);
}

void BindLosses(py::module_& m) {
  m.def("divergence", [](const TokenDistribution& r, const TokenDistribution& q,
                         const std::string& kind) {
    return ComputeDivergence(r, q, ParseDivergence(kind));
  }, py::arg("r"), py::arg("q"), py::arg("kind") = "kl");
  m.def("nll_loss", [](const ModelParams& p, const std::vector<Triple>& data) {
    return NllLoss(p, data);
  });
  m.def("ga_loss", [](const ModelParams& p, const std::vector<Triple>& data) {
    return GaLoss(p, data);
  });
  m.def("viker_loss", [](const ModelParams& p, const std::vector<Triple>& data,
                         const ReferenceMap& refs, double lambda, const std::string& kind) {
    return VikerLoss(p, data, refs, lambda, ParseDivergence(kind));
  }, py::arg("params"), py::arg("forget"), py::arg("references"), py::arg("lambda_") = 0.5,
        py::arg("kind") = "kl");
  m.def("npo_loss", [](const ModelParams& p, const ModelParams& full,
                       const std::vector<Triple>& data, double beta) {
    return NpoLoss(p, full, data, beta);
  }, py::arg("params"), py::arg("params_full"), py::arg("forget"), py::arg("beta") = 0.4);
  m.def("idkpo_loss", [](const ModelParams& p, const ModelParams& full,
                         const std::vector<Triple>& data, const IdkPool& pool, double beta,
                         std::uint64_t seed) {
    return IdkpoLoss(p, full, data, pool, beta, seed);
  }, py::arg("params"), py::arg("params_full"), py::arg("forget"), py::arg("pool"),
        py::arg("beta") = 0.4, py::arg("seed") = 1);
}

void BindTokenAnalysis(py::module_& m) {
  m.def("entropy", &Entropy);
  m.def("entropy_upper_bound", &EntropyUpperBound);

  py::class_<TokenClassification>(m, "TokenClassification")
      .def_readonly("position", &TokenClassification::position)
      .def_readonly("token", &TokenClassification::token)
      .def_readonly("entropy", &TokenClassification::entropy)
      .def_readonly("reference_prob", &TokenClassification::reference_prob)
      .def_readonly("is_normal", &TokenClassification::is_normal)
      .def_readonly("is_key", &TokenClassification::is_key);

  m.def("classify_tokens", [](const ReferenceDistributions& refs, const TokenSeq& answer,
                              double tau, std::optional<double> epsilon) {
    return epsilon ? ClassifyTokens(refs, answer, tau, *epsilon)
                   : ClassifyTokens(refs, answer, tau);
  }, py::arg("references"), py::arg("answer"), py::arg("tau") = kDefaultNormalTau,
        py::arg("epsilon") = py::none());
}

void BindMetrics(py::module_& m) {
  m.def("rouge_l", [](const TokenSeq& g, const TokenSeq& r) { return RougeL(g, r); });
  m.def("bleu", [](const TokenSeq& g, const TokenSeq& r, int max_n) {
    return Bleu(g, r, max_n);
  }, py::arg("generated"), py::arg("reference"), py::arg("max_n") = 4);
  m.def("evaluate_split", [](const ModelParams& p, const ModelParams& origin,
                             const DatasetSplit& data, const std::string& split) {
    return SummaryDict(EvaluateSplit(p, origin, data, ParseSplit(split)));
  });
}

void BindTraining(py::module_& m) {
  py::class_<UnlearnConfig>(m, "UnlearnConfig")
      .def(py::init<>())
      .def_property(
          "method", [](const UnlearnConfig& c) { return std::string(MethodName(c.method)); },
          [](UnlearnConfig& c, const std::string& s) { c.method = ParseMethod(s); })
      .def_property(
          "regularizer",
          [](const UnlearnConfig& c) { return std::string(DivergenceName(c.regularizer)); },
          [](UnlearnConfig& c, const std::string& s) { c.regularizer = ParseDivergence(s); })
      .def_readwrite("lambda_", &UnlearnConfig::lambda)
      .def_readwrite("k", &UnlearnConfig::k)
      .def_readwrite("beta", &UnlearnConfig::beta)
      .def_readwrite("steps", &UnlearnConfig::steps)
      .def_readwrite("learning_rate", &UnlearnConfig::learning_rate)
      .def_readwrite("batch_size", &UnlearnConfig::batch_size)
      .def_readwrite("seed", &UnlearnConfig::seed)
      .def("validate", &UnlearnConfig::Validate)
      .def("to_text", &UnlearnConfig::ToText)
      .def_static("from_text", [](const std::string& s) { return UnlearnConfig::FromText(s); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_steps", &TrainConfig::max_steps)
      .def_property(
          "learning_rate", [](const TrainConfig& c) { return c.adam.learning_rate; },
          [](TrainConfig& c, double lr) { c.adam.learning_rate = lr; })
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("convergence_prob", &TrainConfig::convergence_prob)
      .def_readwrite("check_interval", &TrainConfig::check_interval)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("validate", &TrainConfig::Validate);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("kind", &RunRecord::kind)
      .def_readonly("loss_trace", &RunRecord::loss_trace)
      .def_readonly("steps", &RunRecord::steps)
      .def_readonly("converged", &RunRecord::converged)
      .def_readonly("params_checksum", &RunRecord::params_checksum)
      .def("to_json", &RunRecord::ToJson);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("record", &TrainResult::record);

  py::class_<TokenProbabilityStats>(m, "TokenProbabilityStats")
      .def_readonly("min", &TokenProbabilityStats::min)
      .def_readonly("mean", &TokenProbabilityStats::mean)
      .def_readonly("geometric_mean", &TokenProbabilityStats::geometric_mean)
      .def_readonly("num_tokens", &TokenProbabilityStats::num_tokens);

  m.def("answer_token_stats", [](const ModelParams& p, const std::vector<Triple>& data) {
    return AnswerTokenStats(p, data);
  });
  m.def("train_full", [](const ModelParams& init, const std::vector<Triple>& data,
                         const TrainConfig& config) {
    py::gil_scoped_release release;
    return TrainFull(init, data, config);
  });
  m.def("unlearn", [](const ModelParams& full, const std::vector<Triple>& forget,
                      const UnlearnConfig& config, const ReferenceMap* refs,
                      const IdkPool* pool) {
    py::gil_scoped_release release;
    return Unlearn(full, forget, config, refs, pool);
  }, py::arg("params_full"), py::arg("forget"), py::arg("config"),
        py::arg("references") = nullptr, py::arg("pool") = nullptr);

  m.def("save_checkpoint", [](const std::filesystem::path& path, const ModelParams& p) {
    SaveCheckpoint(path, Checkpoint{p, std::nullopt, {}});
  });
  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    return LoadCheckpoint(path).params;
  });
}

}  // namespace
}  // namespace unlearnlab

PYBIND11_MODULE(_core, m) {
  m.doc() = "Visual-reference unlearning on a toy multimodal language model.";
  unlearnlab::BindErrors(m);
  unlearnlab::BindModel(m);
  unlearnlab::BindData(m);
  unlearnlab::BindReferences(m);
  unlearnlab::BindLosses(m);
  unlearnlab::BindTokenAnalysis(m);
  unlearnlab::BindMetrics(m);
  unlearnlab::BindTraining(m);
}
