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

// Central finite-difference checks of the analytic loss gradients.

#ifndef UNLEARNLAB_GRADIENT_CHECK_H_
#define UNLEARNLAB_GRADIENT_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "unlearnlab/losses.h"
#include "unlearnlab/model.h"

namespace unlearnlab {

struct NamedLoss {
  std::string name;
  LossSpec spec;
};

// The seven objectives in report order: nll, ga, viker_kl, viker_jsd,
// viker_cos, npo, idkpo. Pointers are stored, not copied.
std::vector<NamedLoss> StandardLosses(const ModelParams& params_full,
                                      const ReferenceMap& references, double lambda,
                                      const IdkPool& pool,
                                      const std::map<TripleId, std::size_t>& idk_assignment,
                                      double beta);

struct GradientCheckOptions {
  double step = 1e-5;
  double rel_tolerance = 1e-4;
  // Components whose larger magnitude is below this are skipped.
  double min_magnitude = 1e-8;
  // Applied to the analytic gradient before comparison.
  std::function<void(GradientVector&)> analytic_hook;
};

struct GradientCheckResult {
  std::string loss;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  int num_checked = 0;
  int num_components = 0;
  bool pass = true;
};

// Compares LossGradient against (L(t + h e_j) - L(t - h e_j)) / 2h on every
// parameter. The relative error is |a - f| / max(|a|, |f|).
GradientCheckResult CheckGradient(const ModelParams& params, const NamedLoss& loss,
                                  std::span<const Triple> data,
                                  const GradientCheckOptions& options = {});

}  // namespace unlearnlab

#endif  // UNLEARNLAB_GRADIENT_CHECK_H_
