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
#include "dpclip/bench.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "dpclip/optimizer.h"
#include "dpclip/restart.h"

namespace dpclip {
namespace {

constexpr uint64_t kSamplerStream = 0xba7c4;
constexpr uint64_t kRunNoiseStream = 0x0153;
constexpr int64_t kDefaultEpochBatch = 200;

template <typename E>
struct NameTable {
  E value;
  std::string_view name;
};

constexpr NameTable<Task> kTasks[] = {
    {Task::kRidge, "ridge"}, {Task::kLogistic, "logistic"}, {Task::kSynthetic, "synthetic"}};
constexpr NameTable<Method> kMethods[] = {{Method::kT2, "t2"},
                                          {Method::kT3, "t3"},
                                          {Method::kRestarted, "restarted"},
                                          {Method::kCsgdNonPrivate, "csgd_nonprivate"}};
constexpr NameTable<RegimePolicy> kPolicies[] = {
    {RegimePolicy::kReject, "reject"},
    {RegimePolicy::kFallbackStrong, "fallback_strong"},
    {RegimePolicy::kWarn, "warn"}};
constexpr NameTable<StepsizeRule> kStepsizeRules[] = {
    {StepsizeRule::kSchedule, "schedule"}, {StepsizeRule::kConservative, "conservative"}};
constexpr NameTable<LambdaPreset> kPresets[] = {{LambdaPreset::kNone, "none"},
                                                {LambdaPreset::kAdult, "adult"}};

template <typename E, size_t K>
std::string_view NameOf(const NameTable<E> (&table)[K], E value) {
  for (const auto& t : table) {
    if (t.value == value) return t.name;
  }
  return "?";
}

template <typename E, size_t K>
E ParseName(const NameTable<E> (&table)[K], std::string_view name,
            std::string_view what) {
  for (const auto& t : table) {
    if (t.name == name) return t.value;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

struct Problem {
  Dataset data;
  LossKind loss = LossKind::Ridge();
  Vector x0;
  ExperimentSetup setup;
};

Problem BuildProblem(const ExperimentConfig& config) {
  Problem p;
  if (config.task == Task::kSynthetic) {
    p.loss = config.synthetic_logistic ? LossKind::Logistic(config.logistic_form)
                                       : LossKind::Ridge();
    const int32_t d = config.synthetic.dim;
    const Vector x_true =
        Vector::Constant(d, config.planted_norm / std::sqrt(static_cast<double>(d)));
    p.data = GenerateHeavyTailed(config.synthetic, config.synthetic_rows, p.loss, x_true);
  } else {
    if (config.data_path.empty()) throw ConfigError("--data is required for task " +
                                                    std::string(TaskName(config.task)));
    p.loss = config.task == Task::kRidge ? LossKind::Ridge()
                                         : LossKind::Logistic(config.logistic_form);
    p.data = LoadLibsvmFile(config.data_path);
    if (config.train_rows > 0) p.data = TakeFirst(p.data, config.train_rows);
  }
  if (p.data.empty()) throw ConfigError("dataset is empty");

  ExperimentSetup& s = p.setup;
  s.n = p.data.size();
  s.dim = p.data.dim;
  p.x0 = Vector::Zero(p.data.dim);
  const ReferenceMin ref = SolveReferenceMin(p.loss, p.data);
  s.f_min = ref.f_min;
  s.initial_gap = EmpiricalRisk(p.loss, p.x0, p.data) - s.f_min;
  if (!(s.initial_gap > 0)) {
    throw ConfigError("initial point is already optimal; excess risk cannot be normalized");
  }
  const bool need_curvature = std::isnan(config.smoothness) ||
                              std::isnan(config.strong_convexity);
  CurvatureBounds curv;
  if (need_curvature) curv = EstimateCurvature(p.loss, p.data, ref.x_star);
  s.smoothness = std::isnan(config.smoothness) ? curv.largest : config.smoothness;
  s.strong_convexity =
      std::isnan(config.strong_convexity) ? curv.smallest : config.strong_convexity;
  s.radius = std::isnan(config.radius) ? (p.x0 - ref.x_star).norm() : config.radius;
  if (!(s.smoothness > 0)) throw ConfigError("smoothness L must be positive");
  if (!(s.radius > 0)) throw ConfigError("radius R0 must be positive");
  s.delta = config.delta > 0 ? config.delta : 1.0 / static_cast<double>(s.n);
  const int64_t epoch_batch = config.batch > 0 ? config.batch : kDefaultEpochBatch;
  s.iterations_per_epoch = (s.n + epoch_batch - 1) / epoch_batch;
  s.iterations = config.iterations > 0 ? config.iterations
                                       : config.epochs * s.iterations_per_epoch;
  return p;
}

struct Job {
  double epsilon;
  uint64_t seed;
};

struct JobOutput {
  std::vector<ResultRow> rows;
};

double Normalized(const Problem& p, const Vector& x) {
  const double gap = EmpiricalRisk(p.loss, x, p.data) - p.setup.f_min;
  return std::max(0.0, gap / p.setup.initial_gap);
}

// Sigma for a single run under the configured accountant and regime policy.
// Returns the budget actually used (the mode may change on fallback).
PrivacyBudget CalibrateRun(const ExperimentConfig& config, Schedule& s, double epsilon,
                           double delta, int64_t n, bool& warned) {
  PrivacyBudget budget{.epsilon = epsilon,
                       .delta = delta,
                       .mode = config.accountant,
                       .abadi_c = config.abadi_c,
                       .regime_c1 = config.regime_c1};
  if (config.method == Method::kCsgdNonPrivate) budget.mode = AccountantMode::kNone;
  warned = false;
  if (budget.mode == AccountantMode::kAbadiConstant &&
      !CheckEpsilonRegime(epsilon, s.iterations, s.batch, n, config.regime_c1)) {
    switch (config.regime_policy) {
      case RegimePolicy::kReject: {
        std::ostringstream msg;
        msg << "eps = " << epsilon << " violates eps <= c1 N m^2 / n^2 = "
            << config.regime_c1 * static_cast<double>(s.iterations) *
                   static_cast<double>(s.batch) * static_cast<double>(s.batch) /
                   (static_cast<double>(n) * static_cast<double>(n))
            << " (N = " << s.iterations << ", m = " << s.batch << ", n = " << n
            << "); use --accountant strong or --regime-policy";
        throw ConfigError(msg.str());
      }
      case RegimePolicy::kFallbackStrong:
        budget.mode = AccountantMode::kStrongComposition;
        break;
      case RegimePolicy::kWarn:
        warned = true;
        break;
    }
  }
  switch (budget.mode) {
    case AccountantMode::kAbadiConstant:
      s.noise_std = CalibrateSigma(s.level, s.batch, s.iterations, n, budget);
      break;
    case AccountantMode::kStrongComposition:
      s.noise_std = CalibrateSigmaStrong(s.level, s.batch, s.iterations, budget);
      break;
    case AccountantMode::kNone:
      s.noise_std = 0.0;
      break;
  }
  return budget;
}

std::optional<double> ResolveLambda(const ExperimentConfig& config) {
  if (config.lambda_override) return config.lambda_override;
  if (config.lambda_preset == LambdaPreset::kAdult) {
    switch (config.method) {
      case Method::kT2:
        return kAdultLambdaT2;
      case Method::kT3:
        return kAdultLambdaT3;
      case Method::kCsgdNonPrivate:
        return kAdultLambdaCsgd;
      case Method::kRestarted:
        break;
    }
  }
  return std::nullopt;
}

SamplingMode ResolveSampling(const ExperimentConfig& config, bool noisy) {
  if (config.sampling) return *config.sampling;
  return noisy ? SamplingMode::kPoisson : SamplingMode::kWithReplacement;
}

JobOutput RunSingle(const ExperimentConfig& config, const Problem& p, const Job& job) {
  const ExperimentSetup& setup = p.setup;
  const double L = setup.smoothness;
  const double beta = config.beta;
  const int64_t N = setup.iterations;
  const bool noisy = config.method != Method::kCsgdNonPrivate &&
                     config.accountant != AccountantMode::kNone;
  Schedule s;
  ProjectionSpec projection;
  if (config.method == Method::kT3) {
    s = ScheduleUnbounded({.smoothness = L,
                           .radius = setup.radius,
                           .beta = beta,
                           .iterations = N,
                           .grad_std = config.grad_std,
                           .dim = setup.dim,
                           .n = setup.n,
                           .epsilon = noisy ? job.epsilon
                                            : std::numeric_limits<double>::infinity(),
                           .delta = setup.delta});
  } else {
    s = ScheduleBoundedDomain(L, setup.radius, beta, N, config.grad_std);
    projection = {.center = p.x0, .radius = setup.radius, .enabled = true};
  }
  if (config.batch > 0) s.batch = config.batch;
  if (auto lambda = ResolveLambda(config)) s.level = *lambda;
  if (config.stepsize_override) {
    s.stepsize = *config.stepsize_override;
  } else if (config.stepsize_rule == StepsizeRule::kConservative) {
    const double log_term = config.method == Method::kT3
                                ? std::log(4.0 * static_cast<double>(N) / beta)
                                : std::log(4.0 / beta);
    s.stepsize = 1.0 / (24.0 * L * log_term);
  }
  bool warned = false;
  const PrivacyBudget budget = CalibrateRun(config, s, job.epsilon, setup.delta, setup.n, warned);

  DatasetOracle oracle(p.data, p.loss,
                       {.mode = ResolveSampling(config, budget.mode != AccountantMode::kNone),
                        .seed = DeriveSeed(job.seed, kSamplerStream, 0)});
  RunOptions options{.noise_seed = DeriveSeed(job.seed, kRunNoiseStream, 0),
                     .checkpoint_every = setup.iterations_per_epoch};
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec = RunClippedDpsgd(oracle, p.x0, s, projection, budget, options);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!LedgerVerify(rec.ledger) || rec.ledger.declared_epsilon != budget.epsilon) {
    throw ConfigError("run ledger does not match its privacy parameters");
  }

  JobOutput out;
  std::vector<int64_t> clipped_prefix(rec.diagnostics.size() + 1, 0);
  for (size_t k = 0; k < rec.diagnostics.size(); ++k) {
    clipped_prefix[k + 1] = clipped_prefix[k] + (rec.diagnostics[k].clipped ? 1 : 0);
  }
  for (const Checkpoint& c : rec.checkpoints) {
    ResultRow row;
    row.method = std::string(MethodName(config.method));
    row.epsilon = job.epsilon;
    row.seed = job.seed;
    row.epoch = (c.iteration + setup.iterations_per_epoch - 1) / setup.iterations_per_epoch;
    row.excess_risk = c.iteration == 0 ? 1.0 : Normalized(p, c.average);
    row.wallclock_s = seconds;
    row.clipped_frac = c.iteration == 0 ? 0.0
                                        : static_cast<double>(clipped_prefix[c.iteration]) /
                                              static_cast<double>(c.iteration);
    row.regime_warning = warned;
    out.rows.push_back(std::move(row));
  }
  return out;
}

JobOutput RunRestartedJob(const ExperimentConfig& config, const Problem& p, const Job& job) {
  const ExperimentSetup& setup = p.setup;
  if (!(setup.strong_convexity > 0)) {
    throw ConfigError("restarted method needs a strongly convex objective (mu > 0)");
  }
  ProblemSpec problem{.dim = static_cast<int32_t>(setup.dim),
                      .smoothness = setup.smoothness,
                      .strong_convexity = setup.strong_convexity,
                      .grad_variance = config.grad_std,
                      .convexity = ConvexityClass::kStronglyConvex};
  const int stages = config.stages > 0
                         ? config.stages
                         : DefaultStageCount(setup.smoothness, setup.strong_convexity, setup.n);
  const int64_t inner = config.inner_iterations > 0
                            ? config.inner_iterations
                            : MinInnerIterations(setup.smoothness, setup.strong_convexity,
                                                 config.beta);
  PrivacyBudget privacy{.epsilon = job.epsilon,
                        .delta = setup.delta,
                        .mode = config.accountant,
                        .abadi_c = config.abadi_c,
                        .regime_c1 = config.regime_c1};
  RestartPlan plan = RestartPlan::Create(problem, stages, inner, config.beta, setup.radius,
                                         privacy);
  bool warned = false;
  if (privacy.mode == AccountantMode::kAbadiConstant && config.batch > 0 &&
      !CheckEpsilonRegime(plan.stage_budget.epsilon, inner, config.batch, setup.n,
                          config.regime_c1)) {
    switch (config.regime_policy) {
      case RegimePolicy::kReject:
        throw ConfigError("stage eps_hat violates eps <= c1 N0 m^2 / n^2; use "
                          "--accountant strong or --regime-policy");
      case RegimePolicy::kFallbackStrong:
        privacy.mode = AccountantMode::kStrongComposition;
        break;
      case RegimePolicy::kWarn:
        warned = true;
        break;
    }
  }
  DatasetOracle oracle(p.data, p.loss,
                       {.mode = ResolveSampling(config, privacy.mode != AccountantMode::kNone),
                        .seed = DeriveSeed(job.seed, kSamplerStream, 0)});
  const auto t0 = std::chrono::steady_clock::now();
  RestartRecord rec = RunRestarted(oracle, p.x0, plan, problem, privacy,
                                   {.seed = DeriveSeed(job.seed, kRunNoiseStream, 0),
                                    .batch_override = config.batch});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!LedgerVerify(rec.ledger)) {
    throw ConfigError("restart ledger does not match its privacy parameters");
  }
  JobOutput out;
  int64_t clipped = 0;
  int64_t steps = 0;
  for (int t = 0; t <= stages; ++t) {
    if (t > 0) {
      for (const auto& d : rec.stages[t - 1].diagnostics) clipped += d.clipped ? 1 : 0;
      steps += static_cast<int64_t>(rec.stages[t - 1].diagnostics.size());
    }
    ResultRow row;
    row.method = std::string(MethodName(config.method));
    row.epsilon = job.epsilon;
    row.seed = job.seed;
    row.epoch = t;
    row.excess_risk =
        t == 0 ? 1.0 : Normalized(p, t == stages ? rec.output : rec.stage_starts[t]);
    row.wallclock_s = seconds;
    row.clipped_frac = steps == 0 ? 0.0 : static_cast<double>(clipped) / steps;
    row.regime_warning = warned;
    out.rows.push_back(std::move(row));
  }
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view TaskName(Task task) { return NameOf(kTasks, task); }
std::string_view MethodName(Method method) { return NameOf(kMethods, method); }
std::string_view RegimePolicyName(RegimePolicy policy) { return NameOf(kPolicies, policy); }
Task ParseTask(std::string_view name) { return ParseName(kTasks, name, "task"); }
Method ParseMethod(std::string_view name) { return ParseName(kMethods, name, "method"); }
RegimePolicy ParseRegimePolicy(std::string_view name) {
  return ParseName(kPolicies, name, "regime policy");
}
StepsizeRule ParseStepsizeRule(std::string_view name) {
  return ParseName(kStepsizeRules, name, "stepsize rule");
}
LambdaPreset ParseLambdaPreset(std::string_view name) {
  return ParseName(kPresets, name, "lambda preset");
}

void ExperimentConfig::Validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (epsilons.empty()) throw ConfigError("at least one eps is required");
  for (double e : epsilons) {
    if (!(e > 0) || !std::isfinite(e)) throw ConfigError("every eps must be positive");
  }
  if (!(beta > 0 && beta < 1)) throw ConfigError("beta must lie in (0, 1)");
  if (!(delta >= 0 && delta < 1)) throw ConfigError("delta must lie in (0, 1)");
  if (iterations <= 0 && epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch < 0) throw ConfigError("batch must be nonnegative");
  if (!(grad_std >= 0)) throw ConfigError("sigma must be nonnegative");
  if (lambda_override && !(*lambda_override > 0)) {
    throw ConfigError("lambda override must be positive");
  }
  if (stepsize_override && !(*stepsize_override > 0)) {
    throw ConfigError("stepsize override must be positive");
  }
  if (task == Task::kSynthetic) {
    synthetic.Validate();
    if (synthetic_rows < 1) throw ConfigError("synthetic rows must be >= 1");
    if (!(planted_norm > 0)) throw ConfigError("planted norm must be positive");
  }
  if (!(abadi_c > 0) || !(regime_c1 > 0)) throw ConfigError("constants must be positive");
  if (stages < 0 || inner_iterations < 0) {
    throw ConfigError("stage settings must be nonnegative");
  }
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const Problem problem = BuildProblem(config);

  std::vector<Job> jobs;
  for (double eps : config.epsilons) {
    for (int r = 0; r < config.runs; ++r) {
      jobs.push_back({eps, config.seed + static_cast<uint64_t>(r)});
    }
  }
  std::vector<JobOutput> outputs(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
      try {
        outputs[j] = config.method == Method::kRestarted
                         ? RunRestartedJob(config, problem, jobs[j])
                         : RunSingle(config, problem, jobs[j]);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  result.setup = problem.setup;
  for (auto& o : outputs) {
    for (auto& row : o.rows) result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tie(a.method, a.epsilon, a.seed, a.epoch) <
                            std::tie(b.method, b.epsilon, b.seed, b.epoch);
                   });
  return result;
}

std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows, bool best) {
  // (method, eps) -> seed -> (error, wallclock)
  std::map<std::pair<std::string, double>,
           std::map<uint64_t, std::tuple<int64_t, double, double>>>
      groups;
  for (const ResultRow& r : rows) {
    auto& per_seed = groups[{r.method, r.epsilon}];
    auto it = per_seed.find(r.seed);
    if (it == per_seed.end()) {
      per_seed.emplace(r.seed, std::make_tuple(r.epoch, r.excess_risk, r.wallclock_s));
      continue;
    }
    auto& [epoch, error, wall] = it->second;
    if (best ? r.excess_risk < error : r.epoch > epoch) {
      epoch = r.epoch;
      error = r.excess_risk;
    }
    wall = r.wallclock_s;
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, per_seed] : groups) {
    std::vector<double> errors;
    std::vector<double> walls;
    for (const auto& [seed, v] : per_seed) {
      errors.push_back(std::get<1>(v));
      walls.push_back(std::get<2>(v));
    }
    out.push_back({.method = key.first,
                   .epsilon = key.second,
                   .runs = static_cast<int64_t>(errors.size()),
                   .mean_error = Mean(errors),
                   .std_error = SampleStd(errors),
                   .mean_wallclock_s = Mean(walls),
                   .std_wallclock_s = SampleStd(walls)});
  }
  return out;
}

void WriteRowsCsv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "method,eps,seed,epoch,excess_risk,wallclock_s,clipped_frac\n";
  for (const ResultRow& r : rows) {
    out << r.method << ',' << FormatDouble(r.epsilon) << ',' << r.seed << ',' << r.epoch
        << ',' << FormatDouble(r.excess_risk) << ',' << FormatDouble(r.wallclock_s) << ','
        << FormatDouble(r.clipped_frac) << '\n';
  }
}

void WriteSummaryCsv(const std::vector<SummaryRow>& summary, std::ostream& out) {
  out << "method,eps,runs,mean_error,std_error,mean_wallclock_s,std_wallclock_s\n";
  for (const SummaryRow& s : summary) {
    out << s.method << ',' << FormatDouble(s.epsilon) << ',' << s.runs << ','
        << FormatDouble(s.mean_error) << ',' << FormatDouble(s.std_error) << ','
        << FormatDouble(s.mean_wallclock_s) << ',' << FormatDouble(s.std_wallclock_s) << '\n';
  }
}

void WriteSummaryText(const std::vector<SummaryRow>& summary, std::ostream& out) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "method" << std::right << std::setw(8) << "eps"
     << std::setw(6) << "runs" << std::setw(12) << "error" << std::setw(12) << "std"
     << std::setw(12) << "time_s" << std::setw(12) << "time_std" << '\n';
  for (const SummaryRow& s : summary) {
    os << std::left << std::setw(16) << s.method << std::right << std::defaultfloat
       << std::setprecision(4) << std::setw(8) << s.epsilon << std::setw(6) << s.runs
       << std::setw(12) << s.mean_error << std::setw(12) << s.std_error << std::fixed
       << std::setprecision(3) << std::setw(12) << s.mean_wallclock_s << std::setw(12)
       << s.std_wallclock_s << '\n';
  }
  out << os.str();
}

int64_t SuggestIterations(double radius, int64_t n, double epsilon, int64_t dim,
                          double delta) {
  if (!(radius > 0) || n < 1 || !(epsilon > 0) || dim < 1 || !(delta > 0 && delta < 1)) {
    throw InputError("SuggestIterations needs positive inputs and delta in (0, 1)");
  }
  const double base = radius * radius * static_cast<double>(n) * epsilon /
                      std::sqrt(static_cast<double>(dim) * std::log(1.0 / delta));
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(std::pow(base, 2.0 / 7.0))));
}

}  // namespace dpclip
