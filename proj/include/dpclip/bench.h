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
#ifndef DPCLIP_BENCH_H_
#define DPCLIP_BENCH_H_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpclip/data.h"
#include "dpclip/privacy.h"
#include "dpclip/problems.h"

namespace dpclip {

enum class Task { kRidge, kLogistic, kSynthetic };
enum class Method { kT2, kT3, kRestarted, kCsgdNonPrivate };

// What to do when eps > c1 * N * m^2 / n^2 under the abadi accountant.
enum class RegimePolicy {
  kReject,          // ConfigError naming the constraint
  kFallbackStrong,  // recalibrate with the strong-composition accountant
  kWarn,            // keep the abadi sigma and flag the run
};

enum class StepsizeRule {
  kSchedule,      // the schedule's own gamma
  kConservative,  // 1/(24 L ln(4/beta)) for t2 and csgd, 1/(24 L ln(4N/beta)) for t3
};

enum class LambdaPreset { kNone, kAdult };

std::string_view TaskName(Task task);
std::string_view MethodName(Method method);
std::string_view RegimePolicyName(RegimePolicy policy);
Task ParseTask(std::string_view name);
Method ParseMethod(std::string_view name);
RegimePolicy ParseRegimePolicy(std::string_view name);
StepsizeRule ParseStepsizeRule(std::string_view name);
LambdaPreset ParseLambdaPreset(std::string_view name);

// Clipping levels tuned on Adult for t2, t3 and csgd_nonprivate.
inline constexpr double kAdultLambdaT2 = 0.54;
inline constexpr double kAdultLambdaT3 = 0.87;
inline constexpr double kAdultLambdaCsgd = 0.63;

inline constexpr double kDerive = std::numeric_limits<double>::quiet_NaN();

struct ExperimentConfig {
  Task task = Task::kSynthetic;
  Method method = Method::kT2;

  // Real data (ridge / logistic).
  std::string data_path;
  int64_t train_rows = 28000;  // 0 keeps every row
  LogisticForm logistic_form = LogisticForm::kAsWritten;
  // Unset: poisson for private runs, with_replacement for non-private ones.
  std::optional<SamplingMode> sampling;

  // Synthetic planted problem.
  HeavyTailSpec synthetic;
  int64_t synthetic_rows = 10000;
  bool synthetic_logistic = false;
  double planted_norm = 1.0;  // ||x_true||; x0 = 0

  std::vector<double> epsilons = {0.5, 0.75, 1.0, 2.0};
  double delta = 0.0;  // 0 means 1/n
  double beta = 0.01;
  int64_t epochs = 30;
  int64_t iterations = 0;  // explicit N; overrides epochs when > 0
  int64_t batch = 200;     // 0 uses the schedule's formula
  int runs = 1;
  uint64_t seed = 0;
  std::optional<double> lambda_override;
  LambdaPreset lambda_preset = LambdaPreset::kNone;
  StepsizeRule stepsize_rule = StepsizeRule::kSchedule;
  std::optional<double> stepsize_override;

  AccountantMode accountant = AccountantMode::kAbadiConstant;
  double abadi_c = 1.0;
  double regime_c1 = 1.0;
  RegimePolicy regime_policy = RegimePolicy::kReject;

  // Problem constants; NaN derives them from the data and the reference
  // minimizer (a non-private computation).
  double smoothness = kDerive;
  double strong_convexity = kDerive;
  double radius = kDerive;
  double grad_std = 1.0;

  // Restarted method. 0 means the default stage count / smallest N0.
  int stages = 0;
  int64_t inner_iterations = 0;

  bool emit_trajectory = false;
  bool report_best = false;
  int threads = 0;  // 0 means hardware concurrency

  void Validate() const;
};

struct ResultRow {
  std::string method;
  double epsilon = 0.0;
  uint64_t seed = 0;
  int64_t epoch = 0;  // stage index for the restarted method
  double excess_risk = 0.0;
  double wallclock_s = 0.0;
  double clipped_frac = 0.0;
  bool regime_warning = false;
};

// Resolved constants shared by every run of an experiment.
struct ExperimentSetup {
  int64_t n = 0;
  int64_t dim = 0;
  double f_min = 0.0;
  double initial_gap = 0.0;
  double smoothness = 0.0;
  double strong_convexity = 0.0;
  double radius = 0.0;
  double delta = 0.0;
  int64_t iterations = 0;
  int64_t iterations_per_epoch = 0;
};

struct ExperimentResult {
  ExperimentSetup setup;
  std::vector<ResultRow> rows;  // sorted by (method, eps, seed, epoch)
};

// Runs every (eps, seed) pair of the sweep. Seeds are config.seed + r for
// r < runs. Rows are deterministic per seed apart from wallclock_s.
ExperimentResult RunExperiment(const ExperimentConfig& config);

struct SummaryRow {
  std::string method;
  double epsilon = 0.0;
  int64_t runs = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_wallclock_s = 0.0;
  double std_wallclock_s = 0.0;
};

// Per (method, eps): mean and sample standard deviation over seeds of the
// final-epoch error (or each seed's best epoch when `best`).
std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows,
                                  bool best = false);

void WriteRowsCsv(const std::vector<ResultRow>& rows, std::ostream& out);
void WriteSummaryCsv(const std::vector<SummaryRow>& summary, std::ostream& out);
void WriteSummaryText(const std::vector<SummaryRow>& summary, std::ostream& out);

// ceil((R0^2 n eps / sqrt(d ln(1/delta)))^(2/7)); advisory only.
int64_t SuggestIterations(double radius, int64_t n, double epsilon, int64_t dim,
                          double delta);

}  // namespace dpclip

#endif  // DPCLIP_BENCH_H_
