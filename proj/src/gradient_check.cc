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

#include "unlearnlab/gradient_check.h"

#include <algorithm>
#include <cmath>

#include "unlearnlab/errors.h"

namespace unlearnlab {

std::vector<NamedLoss> StandardLosses(const ModelParams& params_full,
                                      const ReferenceMap& references, double lambda,
                                      const IdkPool& pool,
                                      const std::map<TripleId, std::size_t>& idk_assignment,
                                      double beta) {
  return {
      {"nll", NllObjective{}},
      {"ga", GaObjective{}},
      {"viker_kl", VikerObjective{&references, lambda, Divergence::kKL, true}},
      {"viker_jsd", VikerObjective{&references, lambda, Divergence::kJSD, true}},
      {"viker_cos", VikerObjective{&references, lambda, Divergence::kCoS, true}},
      {"npo", NpoObjective{&params_full, beta}},
      {"idkpo", IdkpoObjective{&params_full, &pool, idk_assignment, beta}},
  };
}

GradientCheckResult CheckGradient(const ModelParams& params, const NamedLoss& loss,
                                  std::span<const Triple> data,
                                  const GradientCheckOptions& options) {
  if (!(options.step > 0.0)) throw ValidationError("finite-difference step must be > 0");
  GradientVector analytic = LossGradient(params, loss.spec, data);
  if (options.analytic_hook) options.analytic_hook(analytic);

  GradientCheckResult result;
  result.loss = loss.name;
  ModelParams probe = params;
  const std::size_t n = probe.NumValues();
  result.num_components = static_cast<int>(n);
  for (std::size_t j = 0; j < n; ++j) {
    double& slot = probe.At(j);
    const double original = slot;
    slot = original + options.step;
    const double up = LossValue(probe, loss.spec, data);
    slot = original - options.step;
    const double down = LossValue(probe, loss.spec, data);
    slot = original;
    const double fd = (up - down) / (2.0 * options.step);
    const double a = analytic.At(j);
    const double scale = std::max(std::abs(a), std::abs(fd));
    if (scale <= options.min_magnitude) continue;
    ++result.num_checked;
    const double abs_err = std::abs(a - fd);
    const double rel_err = abs_err / scale;
    result.max_abs_error = std::max(result.max_abs_error, abs_err);
    if (rel_err > result.max_rel_error) {
      result.max_rel_error = rel_err;
      result.worst_index = j;
    }
  }
  result.pass = result.max_rel_error < options.rel_tolerance;
  return result;
}

}  // namespace unlearnlab
