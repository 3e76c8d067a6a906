// Copyright 2026 The dpclip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DPCLIP_RESTART_H_
#define DPCLIP_RESTART_H_

#include <cstdint>
#include <vector>

#include "dpclip/common.h"
#include "dpclip/optimizer.h"
#include "dpclip/privacy.h"
#include "dpclip/problems.h"

namespace dpclip {

// N0 / ln(4 N0 / beta) >= 768 L / mu.
bool SatisfiesRestartCondition(int64_t inner_iterations, double smoothness,
                               double strong_convexity, double beta);

// Smallest N0 >= 1 satisfying SatisfiesRestartCondition.
int64_t MinInnerIterations(double smoothness, double strong_convexity,
                           double beta);

// ceil((L / mu) * log2(n)).
int DefaultStageCount(double smoothness, double strong_convexity, int64_t n);

enum class RadiusRule {
  // R0^t = R0 / 2^(t/2): the distance bound implied by halving the
  // optimality gap each stage under mu-strong convexity.
  kGeometricHalving,
  // R0^t taken from RestartPlan::user_radii (e.g. measured distances to a
  // planted solution).
  kUserSupplied,
};

struct RestartPlan {
  int stages = 0;                 // tau
  int64_t inner_iterations = 1;   // N0
  StageBudget stage_budget;       // per-stage (eps_hat, delta_hat)
  RadiusRule rule = RadiusRule::kGeometricHalving;
  double base_radius = 1.0;       // R0
  std::vector<double> user_radii;
  double beta = 0.01;

  // Validates the inner-iteration condition against `problem` and splits
  // the budget over `stages` (ConfigError / InputError on failure).
  static RestartPlan Create(const ProblemSpec& problem, int stages,
                            int64_t inner_iterations, double beta,
                            double base_radius, const PrivacyBudget& privacy,
                            RadiusRule rule = RadiusRule::kGeometricHalving,
                            std::vector<double> user_radii = {});

  double StageRadius(int stage) const;
  // Probability with which all stage guarantees hold jointly: 1 - tau * beta.
  double Confidence() const { return 1.0 - stages * beta; }
};

struct RestartOptions {
  uint64_t seed = 0;
  // Replaces every stage's scheduled batch size.
  int64_t batch_override = 0;
  bool keep_iterates = false;
  bool record_loss = false;
};

struct RestartRecord {
  Vector output;
  std::vector<Vector> stage_starts;  // x-hat^0 .. x-hat^{tau-1}
  std::vector<Schedule> schedules;
  std::vector<RunRecord> stages;
  PrivacyLedger ledger;
};

// Runs tau stages of the unprojected clipped optimizer, each for N0
// iterations from the previous stage's averaged output, with the unbounded
// schedule evaluated at the stage radius and the stage budget. The composed
// ledger is verified before the oracle is touched. RunError carries the
// failing stage.
RestartRecord RunRestarted(const GradOracle& oracle, const Vector& x0,
                           const RestartPlan& plan, const ProblemSpec& problem,
                           const PrivacyBudget& privacy,
                           const RestartOptions& options = {});

}  // namespace dpclip

#endif  // DPCLIP_RESTART_H_
