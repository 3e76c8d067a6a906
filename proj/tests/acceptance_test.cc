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
// End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per
// criterion and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dpclip/bench.h"
#include "dpclip/clipping.h"
#include "dpclip/optimizer.h"
#include "dpclip/privacy.h"
#include "dpclip/restart.h"
#include "formula_oracles.h"

namespace dpclip {
namespace {

using oracle::LD;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

double RelErr(double got, LD want) {
  const double w = static_cast<double>(want);
  if (got == w) return 0.0;
  return std::abs(got - w) / std::max(std::abs(w), 1e-300);
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Final normalized excess risk per (eps, seed).
std::map<double, std::vector<double>> FinalByEpsilon(const std::vector<ResultRow>& rows) {
  std::map<std::pair<double, uint64_t>, std::pair<int64_t, double>> last;
  for (const ResultRow& r : rows) {
    auto& slot = last[{r.epsilon, r.seed}];
    if (r.epoch >= slot.first) slot = {r.epoch, r.excess_risk};
  }
  std::map<double, std::vector<double>> out;
  for (const auto& [key, v] : last) out[key.first].push_back(v.second);
  return out;
}

// 1. Clipping: norm bound, identity below the level, joint homogeneity.
Outcome ClippingExactness() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 1000);
  std::uniform_real_distribution<double> log_norm(-8, 8), log_c(-3, 3);
  std::normal_distribution<double> g;
  int violations = 0, identity_fail = 0, homog_fail = 0, small = 0;
  double worst_homog = 0;
  for (int t = 0; t < 10000; ++t) {
    Vector v(dim(rng));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    v *= std::pow(10.0, log_norm(rng)) / v.norm();
    const double level = std::pow(10.0, log_norm(rng));
    const Vector c = Clip(v, level);
    if (c.norm() > level) ++violations;
    if (v.norm() <= level) {
      ++small;
      if (c != v) ++identity_fail;
    }
    const double k = std::pow(10.0, log_c(rng));
    const Vector lhs = Clip(k * v, k * level);
    const double err = (lhs - k * c).norm() / std::max((k * c).norm(), 1e-300);
    worst_homog = std::max(worst_homog, err);
    if (err > 1e-12) ++homog_fail;
  }
  Outcome o;
  o.status = violations == 0 && identity_fail == 0 && homog_fail == 0 ? Status::kPass
                                                                       : Status::kFail;
  o.detail = Fmt("norm violations %g, identity failures %g, worst homogeneity err %.2e",
                 violations, identity_fail, worst_homog);
  o.detail += Fmt(" (%g small-norm cases)", small);
  return o;
}

// Accepts either neighbour when the ceiling argument sits on an integer.
bool BatchMatches(int64_t got, LD raw) {
  const LD want = std::max<LD>(1, std::ceil(raw));
  if (std::abs(raw - std::round(raw)) < 1e-9L * std::max<LD>(1, raw)) {
    return std::abs(static_cast<LD>(got) - want) <= 1;
  }
  return static_cast<LD>(got) == want;
}

// 2. Every closed form against the long-double second evaluation.
Outcome FormulaChains() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  double worst = 0;
  int batch_fail = 0;
  auto check = [&](double got, LD want) { worst = std::max(worst, RelErr(got, want)); };
  for (int t = 0; t < 1000; ++t) {
    const double L = 10 * u(rng), R = 5 * u(rng), beta = u(rng), sigma = 2 * u(rng);
    const double eps = 3 * u(rng), delta = u(rng) / 10, alpha = 2 * u(rng);
    const double nu = u(rng), level = 10 * u(rng), c = 2 * u(rng);
    const int64_t N = 1 + rng() % 200, d = 1 + rng() % 100, n = 100 + rng() % 100000;
    const int64_t m = 1 + rng() % 500, k = rng() % (N + 1);
    const int tau = 1 + static_cast<int>(rng() % 50);

    const Schedule s2 = ScheduleBoundedDomain(L, R, beta, N, sigma);
    const auto o2 = oracle::BoundedDomain(L, R, beta, N, sigma);
    check(s2.level, o2.level);
    check(s2.stepsize, o2.gamma);
    batch_fail += !BatchMatches(s2.batch, o2.batch_raw);

    const Schedule s3 = ScheduleUnbounded({L, R, beta, N, sigma, d, n, eps, delta});
    const auto o3 = oracle::UnboundedDomain(L, R, beta, N, sigma, d, n, eps, delta);
    check(s3.stepsize, o3.gamma);
    check(s3.noise_radius, o3.d);
    check(s3.level, o3.level);
    batch_fail += !BatchMatches(s3.batch, o3.batch_raw);

    const Schedule s8 = ScheduleHolder({L, nu, R, beta, N, sigma, d, n, eps, delta, alpha});
    const auto o8 = oracle::Holder(L, nu, R, beta, N, sigma, d, n, eps, delta, alpha);
    check(s8.level, o8.level);
    check(s8.noise_radius, o8.d);
    check(s8.stepsize, o8.gamma);
    batch_fail += !BatchMatches(s8.batch, o8.batch_raw);

    check(CalibrateSigma(level, m, N, n,
                         {.epsilon = eps, .delta = delta, .abadi_c = c}),
          oracle::AbadiSigma(level, m, N, n, eps, delta, c));
    check(CalibrateSigmaStrong(
              level, m, N,
              {.epsilon = eps, .delta = delta, .mode = AccountantMode::kStrongComposition}),
          oracle::StrongSigma(level, N, eps, delta));
    const StageBudget sb = SplitBudget(eps, delta, tau);
    const auto os = oracle::SplitBudget(eps, delta, tau);
    check(sb.epsilon, os.epsilon);
    check(sb.delta, os.delta);
    check(DeviationBound(k, level, beta, N, sigma, d),
          oracle::DeviationBound(k, level, beta, N, sigma, d));
    check(static_cast<double>(SuggestIterations(R, n, eps, d, delta)),
          oracle::SuggestIterations(R, n, eps, d, delta));
  }
  return {worst <= 1e-12 && batch_fail == 0 ? Status::kPass : Status::kFail,
          Fmt("worst relative error %.2e, batch mismatches %g", worst, batch_fail)};
}

// Student-t (3 dof) per-coordinate noise scaled so E||xi||^2 = sigma^2.
class StudentNoise {
 public:
  StudentNoise(int dim, double sigma) : scale_(sigma / std::sqrt(3.0 * dim)) {}
  double operator()(std::mt19937_64& rng) { return scale_ * t_(rng); }

 private:
  double scale_;
  std::student_t_distribution<double> t_{3.0};
};

// 3. Cumulative estimator deviation against the high-probability bound.
Outcome DeviationMonteCarlo() {
  const int d = 10;
  const int64_t N = 50, n = 10000;
  const double sigma = 1, beta = 0.05, L = 1, R0 = 10;
  const Schedule s = ScheduleBoundedDomain(L, R0, beta, N, sigma);
  const double lambda = s.level;
  const int64_t m = s.batch;
  const double noise_std = CalibrateSigma(lambda, m, N, n, {.epsilon = 1, .delta = 1e-5});
  std::mt19937_64 rng(303);
  std::normal_distribution<double> g;
  StudentNoise xi(d, sigma);
  const int trials = 1000;
  int exceed = 0;
  double worst_ratio = 0;
  std::vector<Vector> batch(m, Vector(d));
  for (int trial = 0; trial < trials; ++trial) {
    double cumulative = 0;
    bool bad = false;
    for (int64_t k = 0; k < N; ++k) {
      Vector grad(d);
      for (int j = 0; j < d; ++j) grad[j] = g(rng);
      grad *= 0.5 * lambda * std::uniform_real_distribution<double>(0, 1)(rng) / grad.norm();
      for (auto& b : batch) {
        for (int j = 0; j < d; ++j) b[j] = grad[j] + xi(rng);
      }
      const EstimatorOutput est =
          PrivateClippedMean(batch, d, lambda, noise_std, DeriveSeed(303, trial, k));
      cumulative += (est.value - grad).norm();
      const double bound = DeviationBound(k + 1, lambda, beta, N, noise_std, d);
      worst_ratio = std::max(worst_ratio, cumulative / bound);
      if (cumulative > bound) bad = true;
    }
    exceed += bad;
  }
  const double frac = static_cast<double>(exceed) / trials;
  Outcome o{frac <= beta ? Status::kPass : Status::kFail,
            Fmt("exceed fraction %.4f (beta %.2f), worst sum/bound %.3f", frac, beta, worst_ratio)};
  o.detail += Fmt(", lambda %.3g, m %g, noise std %.3g", lambda, m, noise_std);
  return o;
}

// 4. Clipped batch mean bias and second moment, heavy-tailed samples.
Outcome BiasVariance() {
  const int d = 10;
  const double sigma = 1, level = 2;
  Vector mu = Vector::Zero(d);
  mu[0] = level / 4;
  std::mt19937_64 rng(404);
  StudentNoise xi(d, sigma);
  bool ok = true;
  std::string detail;
  for (int m : {1, 10, 100}) {
    const int trials = m == 100 ? 20000 : 100000;
    Vector sum = Vector::Zero(d), sumsq = Vector::Zero(d);
    double sq = 0, sq2 = 0;
    Vector mean(d);
    for (int t = 0; t < trials; ++t) {
      mean.setZero();
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) mean[j] += xi(rng);
      }
      mean = mean / m + mu;
      const Vector c = Clip(mean, level);
      sum += c;
      sumsq += c.cwiseProduct(c);
      const double e = (c - mu).squaredNorm();
      sq += e;
      sq2 += e * e;
    }
    const Vector avg = sum / trials;
    const double bias = (avg - mu).norm();
    const double se_bias =
        std::sqrt(((sumsq / trials - avg.cwiseProduct(avg)) / trials).sum());
    const double second = sq / trials;
    const double se_second = std::sqrt((sq2 / trials - second * second) / trials);
    const double bias_cap = 4 * sigma * sigma / (m * level) + 3 * se_bias;
    const double second_cap = 18 * sigma * sigma / m + 3 * se_second;
    ok = ok && bias <= bias_cap && second <= second_cap;
    detail += Fmt("m=%g: bias %.3g", m, bias) + Fmt(" <= %.3g, second moment %.3g", bias_cap, second) +
              Fmt(" <= %.3g; ", second_cap);
  }
  return {ok ? Status::kPass : Status::kFail, detail};
}

// 5. Noise-free restarts halve the gap every stage.
Outcome RestartHalving() {
  const double L = 10, mu = 1, beta = 0.05;
  const int stages = 5;
  const ProblemSpec p{.dim = 3,
                      .smoothness = L,
                      .strong_convexity = mu,
                      .grad_variance = 0,
                      .convexity = ConvexityClass::kStronglyConvex};
  Vector h(3), c(3);
  h << mu, 3, L;
  c << 2, -1, 0.5;
  QuadraticOracle q({.curvatures = h, .center = c});
  const PrivacyBudget none{.mode = AccountantMode::kNone};
  const int64_t n0 = MinInnerIterations(L, mu, beta);
  const RestartPlan plan = RestartPlan::Create(p, stages, n0, beta, c.norm(), none);
  const RestartRecord r = RunRestarted(q, Vector::Zero(3), plan, p, none);
  bool ok = r.stages.size() == static_cast<size_t>(stages);
  double prev = q.Objective(Vector::Zero(3)), worst = 0, contraction = 0;
  for (int t = 0; ok && t < stages; ++t) {
    const double gap = q.Objective(r.stages[t].average);
    worst = std::max(worst, gap / prev);
    ok = ok && gap <= 0.5 * prev + 1e-12 && r.schedules[t].noise_std == 0;
    contraction = std::max(
        contraction, std::pow(1 - r.schedules[t].stepsize * mu, 2.0 * static_cast<double>(n0)));
    prev = gap;
  }
  ok = ok && contraction <= 0.5;
  Outcome o{ok ? Status::kPass : Status::kFail,
            Fmt("N0 %g, worst stage gap ratio %.3g, analytic factor %.3g", n0, worst, contraction)};
  return o;
}

// 6. Stage ledgers recombine and detect a 1% change to any sigma.
Outcome LedgerRoundTrip() {
  const double eps = 0.8, delta = 1e-6;
  double worst = 0;
  int undetected = 0, rejected = 0;
  for (int tau : {1, 2, 5, 10}) {
    const StageBudget b = SplitBudget(eps, delta, tau);
    PrivacyLedger l{.declared_epsilon = eps,
                    .declared_delta = delta,
                    .composition = Composition::kAdvanced};
    for (int t = 0; t < tau; ++t) {
      LedgerEntry e{.stage = t,
                    .mode = AccountantMode::kAbadiConstant,
                    .level = 1.5,
                    .batch = 40,
                    .iterations = 300,
                    .epsilon = b.epsilon,
                    .delta = b.delta,
                    .n = 20000};
      e.sigma = CalibrateSigma(e.level, e.batch, e.iterations, e.n,
                               {.epsilon = b.epsilon, .delta = b.delta});
      l.entries.push_back(e);
    }
    const EpsilonDelta back = RecombineStages(b);
    worst = std::max({worst, RelErr(back.epsilon, eps), RelErr(back.delta, delta)});
    if (!LedgerVerify(l) || !LedgerVerify(PrivacyLedger::Parse(l.Serialize()))) ++rejected;
    for (int t = 0; t < tau; ++t) {
      for (double f : {1.01, 0.99}) {
        PrivacyLedger bad = l;
        bad.entries[t].sigma *= f;
        if (LedgerVerify(bad)) ++undetected;
      }
    }
  }
  return {worst <= 1e-12 && rejected == 0 && undetected == 0 ? Status::kPass : Status::kFail,
          Fmt("worst recombination err %.2e, valid ledgers rejected %g, tampering undetected %g",
              worst, rejected, undetected)};
}

ExperimentConfig PlantedRidge(int64_t rows) {
  ExperimentConfig c;
  c.task = Task::kSynthetic;
  c.synthetic.distribution = HeavyTailDistribution::kPareto;
  c.synthetic.shape = 2.2;
  c.synthetic.dim = 20;
  c.synthetic.seed = 7;
  c.synthetic_rows = rows;
  c.runs = 20;
  c.regime_policy = RegimePolicy::kWarn;
  return c;
}

// 7. Private error shrinks as epsilon grows.
Outcome EpsilonTrend() {
  ExperimentConfig c = PlantedRidge(10000);
  c.method = Method::kT2;
  c.epsilons = {0.5, 1.0, 2.0};
  const auto finals = FinalByEpsilon(RunExperiment(c).rows);
  std::vector<double> med;
  for (double e : c.epsilons) med.push_back(Median(finals.at(e)));
  const bool ok = med[0] >= med[1] && med[1] >= med[2] && med[2] < 0.9;
  return {ok ? Status::kPass : Status::kFail,
          Fmt("median final error at eps 0.5/1/2: %.4g / %.4g / %.4g", med[0], med[1], med[2])};
}

// 8. Clipping against effectively unclipped SGD, no privacy noise.
Outcome HeavyTailRobustness() {
  ExperimentConfig c = PlantedRidge(10000);
  c.method = Method::kCsgdNonPrivate;
  c.epsilons = {1.0};
  c.batch = 10;
  const double clipped = Median(FinalByEpsilon(RunExperiment(c).rows).at(1.0));
  c.lambda_override = 1e12;
  const double unclipped = Median(FinalByEpsilon(RunExperiment(c).rows).at(1.0));
  return {clipped <= unclipped ? Status::kPass : Status::kFail,
          Fmt("median final error clipped %.4g, unclipped %.4g", clipped, unclipped)};
}

// 9. Orderings on the Adult data, when available.
Outcome AdultOrderings() {
  const char* path = std::getenv("DPCLIP_ADULT_PATH");
  if (path == nullptr || *path == '\0') {
    return {Status::kSkip, "set DPCLIP_ADULT_PATH to a libsvm Adult file to run"};
  }
  bool ok = true;
  std::string detail;
  for (Task task : {Task::kRidge, Task::kLogistic}) {
    std::map<Method, std::vector<double>> means;
    for (Method m : {Method::kT2, Method::kT3, Method::kCsgdNonPrivate}) {
      ExperimentConfig c;
      c.task = task;
      c.method = m;
      c.data_path = path;
      c.runs = 100;
      c.lambda_preset = LambdaPreset::kAdult;
      c.stepsize_rule = StepsizeRule::kConservative;
      c.regime_policy = RegimePolicy::kWarn;
      for (const SummaryRow& s : Summarize(RunExperiment(c).rows)) {
        means[m].push_back(s.mean_error);
      }
      for (size_t i = 1; i < means[m].size(); ++i) ok = ok && means[m][i] <= means[m][i - 1];
    }
    for (size_t i = 0; i < means[Method::kT2].size(); ++i) {
      ok = ok && means[Method::kT2][i] < means[Method::kT3][i];
    }
    detail += std::string(TaskName(task)) +
              Fmt(" eps 0.5: t2 %.4g, t3 %.4g, csgd %.4g; ", means[Method::kT2][0],
                  means[Method::kT3][0], means[Method::kCsgdNonPrivate][0]);
  }
  return {ok ? Status::kPass : Status::kFail, detail};
}

// 10. Private error shrinks as the sample grows.
Outcome SampleSizeTrend() {
  std::vector<double> med;
  for (int64_t n : {1000, 10000, 100000}) {
    ExperimentConfig c = PlantedRidge(n);
    c.method = Method::kT2;
    c.epsilons = {1.0};
    med.push_back(Median(FinalByEpsilon(RunExperiment(c).rows).at(1.0)));
  }
  const bool ok = med[0] >= med[1] && med[1] >= med[2];
  return {ok ? Status::kPass : Status::kFail,
          Fmt("median final error at n 1e3/1e4/1e5: %.4g / %.4g / %.4g", med[0], med[1], med[2])};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "clipping exactness", 5, ClippingExactness},
      {2, "formula chains", 5, FormulaChains},
      {3, "cumulative deviation bound", 60, DeviationMonteCarlo},
      {4, "clipped mean bias and variance", 30, BiasVariance},
      {5, "restart halving", 10, RestartHalving},
      {6, "privacy ledger round trip", 1, LedgerRoundTrip},
      {7, "error decreases with epsilon", 180, EpsilonTrend},
      {8, "heavy-tail robustness", 120, HeavyTailRobustness},
      {9, "adult orderings", 1800, AdultOrderings},
      {10, "error decreases with n", 600, SampleSizeTrend},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status != Status::kSkip && secs > c.limit_s) {
      o.status = Status::kFail;
      o.detail += Fmt(" [over the %gs limit]", c.limit_s);
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::printf("%s criterion %d (%s): %s [%.2fs]\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.status == Status::kFail;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dpclip

int main() { return dpclip::Main(); }
