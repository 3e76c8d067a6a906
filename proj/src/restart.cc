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
#include "dpclip/restart.h"

#include <cmath>
#include <limits>
#include <string>

namespace dpclip {
namespace {

constexpr uint64_t kStageStream = 0x57a9e;

void CheckRestartInputs(double smoothness, double strong_convexity, double beta) {
  if (!(strong_convexity > 0) || !(smoothness >= strong_convexity) ||
      !std::isfinite(smoothness)) {
    throw InputError("restart needs L >= mu > 0");
  }
  if (!(beta > 0 && beta < 1)) throw InputError("beta must lie in (0, 1)");
}

}  // namespace

bool SatisfiesRestartCondition(int64_t inner_iterations, double smoothness,
                               double strong_convexity, double beta) {
  if (inner_iterations < 1) return false;
  const long double n0 = static_cast<long double>(inner_iterations);
  const long double target = 768.0L * smoothness / strong_convexity;
  return n0 >= target * std::log(4.0L * n0 / beta);
}

int64_t MinInnerIterations(double smoothness, double strong_convexity,
                           double beta) {
  CheckRestartInputs(smoothness, strong_convexity, beta);
  // N / ln(4N/beta) increases for N >= 1 because 4N/beta > e there.
  int64_t hi = 1;
  while (!SatisfiesRestartCondition(hi, smoothness, strong_convexity, beta)) {
    if (hi > std::numeric_limits<int64_t>::max() / 4) {
      throw InputError("restart condition unreachable in 64-bit range");
    }
    hi *= 2;
  }
  int64_t lo = hi / 2;  // fails (or is 0)
  while (hi - lo > 1) {
    const int64_t mid = lo + (hi - lo) / 2;
    if (SatisfiesRestartCondition(mid, smoothness, strong_convexity, beta)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

int DefaultStageCount(double smoothness, double strong_convexity, int64_t n) {
  if (!(strong_convexity > 0) || !(smoothness > 0) || n < 2) {
    throw InputError("stage count needs L, mu > 0 and n >= 2");
  }
  return static_cast<int>(std::ceil(smoothness / strong_convexity *
                                    std::log2(static_cast<double>(n))));
}

RestartPlan RestartPlan::Create(const ProblemSpec& problem, int stages,
                                int64_t inner_iterations, double beta,
                                double base_radius, const PrivacyBudget& privacy,
                                RadiusRule rule, std::vector<double> user_radii) {
  problem.Validate();
  CheckRestartInputs(problem.smoothness, problem.strong_convexity, beta);
  if (stages < 0) throw InputError("stage count must be nonnegative");
  if (!(base_radius > 0)) throw InputError("base radius must be positive");
  if (!SatisfiesRestartCondition(inner_iterations, problem.smoothness,
                                 problem.strong_convexity, beta)) {
    throw ConfigError("inner iterations N0 = " + std::to_string(inner_iterations) +
                      " violate N0 / ln(4 N0 / beta) >= 768 L / mu; need N0 >= " +
                      std::to_string(MinInnerIterations(
                          problem.smoothness, problem.strong_convexity, beta)));
  }
  if (rule == RadiusRule::kUserSupplied &&
      static_cast<int>(user_radii.size()) < stages) {
    throw InputError("user-supplied radii must cover every stage");
  }
  privacy.Validate();
  RestartPlan plan;
  plan.stages = stages;
  plan.inner_iterations = inner_iterations;
  plan.rule = rule;
  plan.base_radius = base_radius;
  plan.user_radii = std::move(user_radii);
  plan.beta = beta;
  if (stages > 0 && privacy.mode != AccountantMode::kNone) {
    plan.stage_budget = SplitBudget(privacy.epsilon, privacy.delta, stages);
  } else {
    plan.stage_budget = {std::numeric_limits<double>::infinity(), 0.0,
                         std::max(stages, 1)};
  }
  return plan;
}

double RestartPlan::StageRadius(int stage) const {
  if (rule == RadiusRule::kUserSupplied) return user_radii.at(stage);
  return base_radius / std::pow(2.0, 0.5 * stage);
}

RestartRecord RunRestarted(const GradOracle& oracle, const Vector& x0,
                           const RestartPlan& plan, const ProblemSpec& problem,
                           const PrivacyBudget& privacy,
                           const RestartOptions& options) {
  problem.Validate();
  if (x0.size() != oracle.dim()) throw InputError("x0 has wrong dimension");
  RestartRecord out;
  out.output = x0;
  if (plan.stages == 0) return out;

  const bool noisy = privacy.mode != AccountantMode::kNone;
  const PrivacyBudget stage_privacy{.epsilon = plan.stage_budget.epsilon,
                                    .delta = plan.stage_budget.delta,
                                    .mode = privacy.mode,
                                    .abadi_c = privacy.abadi_c,
                                    .regime_c1 = privacy.regime_c1};
  const int64_t n = oracle.num_records();

  // Every stage's schedule is fixed in advance, so the composed ledger can be
  // checked before any gradient is drawn.
  out.ledger.declared_epsilon = privacy.epsilon;
  out.ledger.declared_delta = privacy.delta;
  out.ledger.composition = Composition::kAdvanced;
  for (int t = 0; t < plan.stages; ++t) {
    Schedule s = ScheduleUnbounded(
        {.smoothness = problem.smoothness,
         .radius = plan.StageRadius(t),
         .beta = plan.beta,
         .iterations = plan.inner_iterations,
         .grad_std = problem.grad_variance,
         .dim = oracle.dim(),
         .n = n,
         .epsilon = noisy ? plan.stage_budget.epsilon
                          : std::numeric_limits<double>::infinity(),
         .delta = noisy ? plan.stage_budget.delta : 0.5});
    if (options.batch_override > 0) s.batch = options.batch_override;
    switch (privacy.mode) {
      case AccountantMode::kAbadiConstant:
        s.noise_std = CalibrateSigma(s.level, s.batch, s.iterations, n, stage_privacy);
        break;
      case AccountantMode::kStrongComposition:
        s.noise_std = CalibrateSigmaStrong(s.level, s.batch, s.iterations, stage_privacy);
        break;
      case AccountantMode::kNone:
        s.noise_std = 0.0;
        break;
    }
    out.ledger.entries.push_back(MakeLedgerEntry(s, stage_privacy, n, t));
    out.schedules.push_back(std::move(s));
  }
  if (!LedgerVerify(out.ledger)) {
    throw ConfigError("restart stage budgets do not recombine to the declared total");
  }

  Vector x = x0;
  for (int t = 0; t < plan.stages; ++t) {
    out.stage_starts.push_back(x);
    RunOptions ro{.noise_seed = DeriveSeed(options.seed, kStageStream, t),
                  .keep_iterates = options.keep_iterates,
                  .record_loss = options.record_loss,
                  .iteration_offset = t * plan.inner_iterations,
                  .stage = t};
    try {
      out.stages.push_back(
          RunClippedDpsgd(oracle, x, out.schedules[t], ProjectionSpec{}, stage_privacy, ro));
    } catch (const RunError& e) {
      throw RunError("stage " + std::to_string(t) + ": " + e.what(), e.iteration(), t);
    }
    x = out.stages.back().average;
  }
  out.output = std::move(x);
  return out;
}

}  // namespace dpclip
