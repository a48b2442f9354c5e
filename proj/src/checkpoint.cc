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

#include "unlearnlab/checkpoint.h"

#include <cmath>
#include <string>
#include <vector>

#include "unlearnlab/errors.h"
#include "unlearnlab/text_format.h"

namespace unlearnlab {

namespace {

constexpr std::string_view kHeader = "# unlearnlab checkpoint v1";

std::string TensorLines(const ParamTensors& t, const std::string& prefix) {
  std::string out;
  t.ForEach([&](std::string_view name, std::span<const double> v) {
    out += prefix + std::string(name) + " " + std::to_string(v.size()) + " " +
           text::JoinDoubles(v) + "\n";
  });
  return out;
}

// Fills the tensor named by `cells[0]` (after stripping `prefix`).
bool ReadTensor(ParamTensors& t, const std::string& prefix,
                const std::vector<std::string>& cells) {
  if (cells[0].rfind(prefix, 0) != 0) return false;
  const std::string name = cells[0].substr(prefix.size());
  bool matched = false;
  t.ForEach([&](std::string_view tensor_name, std::span<double> v) {
    if (tensor_name != name) return;
    matched = true;
    if (cells.size() < 2) throw ParseError("tensor line for " + name + " has no count");
    const std::uint64_t count = text::ParseUint(cells[1]);
    if (count != v.size() || cells.size() != count + 2) {
      throw ParseError("tensor " + prefix + name + " has " +
                       std::to_string(cells.size() - 2) + " values, expected " +
                       std::to_string(v.size()));
    }
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = text::ParseDouble(cells[j + 2]);
  });
  return matched;
}

}  // namespace

void AdamStep(ModelParams& params, const GradientVector& grad, OptimizerState& state) {
  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);

  std::vector<std::span<const double>> g;
  grad.ForEach([&](std::string_view, std::span<const double> v) { g.push_back(v); });
  std::vector<std::span<double>> m;
  state.first_moment.ForEach([&](std::string_view, std::span<double> v) { m.push_back(v); });
  std::vector<std::span<double>> s;
  state.second_moment.ForEach([&](std::string_view, std::span<double> v) { s.push_back(v); });

  std::size_t k = 0;
  params.ForEach([&](std::string_view, std::span<double> p) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[k][j] = c.beta1 * m[k][j] + (1.0 - c.beta1) * g[k][j];
      s[k][j] = c.beta2 * s[k][j] + (1.0 - c.beta2) * g[k][j] * g[k][j];
      const double m_hat = m[k][j] / bias1;
      const double v_hat = s[k][j] / bias2;
      p[j] -= c.learning_rate * (m_hat / (std::sqrt(v_hat) + c.epsilon) +
                                 c.weight_decay * p[j]);
    }
    ++k;
  });
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const ModelConfig& c = checkpoint.params.config;
  std::string out(kHeader);
  out += "\nconfig " + std::to_string(c.vocab_size) + " " + std::to_string(c.img_dim) + " " +
         std::to_string(c.hidden_dim) + " " + std::to_string(c.max_positions) + "\n";
  for (const auto& [k, v] : checkpoint.meta) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ValidationError("checkpoint meta key/value must be single tokens/lines");
    }
    out += "meta " + k + " " + v + "\n";
  }
  out += TensorLines(checkpoint.params, "");
  if (checkpoint.optimizer) {
    const OptimizerState& o = *checkpoint.optimizer;
    out += "adam " + std::to_string(o.step) + " " +
           text::FormatDouble(o.config.learning_rate) + " " +
           text::FormatDouble(o.config.beta1) + " " + text::FormatDouble(o.config.beta2) +
           " " + text::FormatDouble(o.config.epsilon) + " " +
           text::FormatDouble(o.config.weight_decay) + "\n";
    out += TensorLines(o.first_moment, "m.");
    out += TensorLines(o.second_moment, "v.");
  }
  out += "end\n";
  text::WriteFile(path, out);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  const std::vector<std::string> lines = text::Split(text::ReadFile(path), '\n');
  if (lines.empty() || lines[0] != kHeader) {
    throw ParseError("'" + path.string() + "' is not a checkpoint file");
  }
  Checkpoint ckpt;
  bool have_config = false;
  bool saw_end = false;
  std::vector<std::string> seen_tensors;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const std::vector<std::string> cells = text::SplitWhitespace(lines[li]);
    const std::string& kind = cells[0];
    if (kind == "end") {
      saw_end = true;
      break;
    }
    if (kind == "config") {
      if (cells.size() != 5) throw ParseError("malformed checkpoint config line");
      ModelConfig c;
      c.vocab_size = static_cast<int>(text::ParseInt(cells[1]));
      c.img_dim = static_cast<int>(text::ParseInt(cells[2]));
      c.hidden_dim = static_cast<int>(text::ParseInt(cells[3]));
      c.max_positions = static_cast<int>(text::ParseInt(cells[4]));
      c.Validate();
      ckpt.params = ModelParams(c);
      have_config = true;
      continue;
    }
    if (!have_config) throw ParseError("checkpoint config must precede tensors");
    if (kind == "meta") {
      if (cells.size() < 3) throw ParseError("malformed checkpoint meta line");
      const std::size_t value_start = lines[li].find(cells[1]) + cells[1].size() + 1;
      ckpt.meta[cells[1]] = lines[li].substr(value_start);
    } else if (kind == "adam") {
      if (cells.size() != 7) throw ParseError("malformed checkpoint adam line");
      AdamConfig a;
      a.learning_rate = text::ParseDouble(cells[2]);
      a.beta1 = text::ParseDouble(cells[3]);
      a.beta2 = text::ParseDouble(cells[4]);
      a.epsilon = text::ParseDouble(cells[5]);
      a.weight_decay = text::ParseDouble(cells[6]);
      ckpt.optimizer = OptimizerState(ckpt.params.config, a);
      ckpt.optimizer->step = text::ParseInt(cells[1]);
    } else if (ReadTensor(ckpt.params, "", cells)) {
      seen_tensors.push_back(kind);
    } else if (ckpt.optimizer && (ReadTensor(ckpt.optimizer->first_moment, "m.", cells) ||
                                  ReadTensor(ckpt.optimizer->second_moment, "v.", cells))) {
      seen_tensors.push_back(kind);
    } else {
      throw ParseError("unexpected checkpoint line starting with '" + kind + "'");
    }
  }
  if (!saw_end) throw ParseError("truncated checkpoint (missing end marker)");
  const std::size_t expected = ckpt.optimizer ? 18 : 6;
  if (seen_tensors.size() != expected) {
    throw ParseError("checkpoint holds " + std::to_string(seen_tensors.size()) +
                     " tensors, expected " + std::to_string(expected));
  }
  return ckpt;
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ckpt = LoadCheckpoint(path);
  const ModelConfig& c = ckpt.params.config;
  if (!(c == expected)) {
    throw ConfigMismatchError(
        "checkpoint config (vocab_size=" + std::to_string(c.vocab_size) +
        ", img_dim=" + std::to_string(c.img_dim) + ", hidden_dim=" +
        std::to_string(c.hidden_dim) + ", max_positions=" + std::to_string(c.max_positions) +
        ") does not match the expected config (vocab_size=" +
        std::to_string(expected.vocab_size) + ", img_dim=" + std::to_string(expected.img_dim) +
        ", hidden_dim=" + std::to_string(expected.hidden_dim) +
        ", max_positions=" + std::to_string(expected.max_positions) + ")");
  }
  return ckpt;
}

std::string ParamsChecksum(const ParamTensors& params) {
  return text::HexDigest(text::Fnv1a(text::JoinDoubles(params.Flatten())));
}

}  // namespace unlearnlab
