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
#include "dpclip/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dpclip/clipping.h"

namespace dpclip {
namespace {

constexpr uint64_t kNoiseStream = 0x701e;
constexpr uint64_t kOracleStream = 0x0ac1e;
constexpr double kMaxBatch = 1e15;

void CheckBeta(double beta) {
  if (!(beta > 0 && beta < 1)) throw InputError("beta must lie in (0, 1)");
}

void CheckPositive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

void CheckPrivacyInputs(double epsilon, double delta) {
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  if (std::isinf(epsilon)) return;
  if (!(delta > 0 && delta < 1)) throw InputError("delta must lie in (0, 1)");
}

int64_t CeilBatch(double m) {
  if (!(m <= kMaxBatch)) {
    throw ConfigError("scheduled batch size " + std::to_string(m) +
                      " is too large to run");
  }
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(m)));
}

}  // namespace

DatasetOracle::DatasetOracle(const Dataset& data, const LossKind& loss,
                             SamplerSpec sampler)
    : data_(data), loss_(loss), sampler_(sampler),
      dim_(std::max<int32_t>(data.dim, 1)) {
  if (data.empty()) throw InputError("DatasetOracle: empty dataset");
}

BatchGradient DatasetOracle::BatchMean(const Vector& x, int64_t batch_size,
                                       int64_t iteration) const {
  const std::vector<int64_t> batch = DrawBatch(data_, sampler_, batch_size, iteration);
  BatchGradient out{Vector::Zero(dim_), static_cast<int64_t>(batch.size())};
  if (batch.empty()) return out;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (int64_t i : batch) AccumulateGrad(loss_, x, data_.examples[i], w, out.mean);
  return out;
}

double DatasetOracle::Objective(const Vector& x) const {
  return EmpiricalRisk(loss_, x, data_);
}

Vector DatasetOracle::FullGradient(const Vector& x) const {
  return EmpiricalGradient(loss_, x, data_);
}

QuadraticOracle::QuadraticOracle(Options options) : opts_(std::move(options)) {
  if (opts_.curvatures.size() < 1 || opts_.center.size() != opts_.curvatures.size()) {
    throw InputError("QuadraticOracle: curvature and center sizes differ");
  }
  if ((opts_.curvatures.array() < 0).any()) {
    throw InputError("QuadraticOracle: curvatures must be nonnegative");
  }
  if (!(opts_.noise_std >= 0) || opts_.num_records < 1) {
    throw InputError("QuadraticOracle: bad noise level or record count");
  }
}

double QuadraticOracle::Objective(const Vector& x) const {
  const Vector r = x - opts_.center;
  return 0.5 * r.dot(opts_.curvatures.cwiseProduct(r));
}

Vector QuadraticOracle::FullGradient(const Vector& x) const {
  return opts_.curvatures.cwiseProduct(x - opts_.center);
}

BatchGradient QuadraticOracle::BatchMean(const Vector& x, int64_t batch_size,
                                         int64_t iteration) const {
  if (batch_size < 1) throw InputError("batch size must be positive");
  BatchGradient out{FullGradient(x), batch_size};
  if (opts_.noise_std == 0.0) return out;
  const Eigen::Index d = dim();
  const double per_coord = opts_.noise_std / std::sqrt(static_cast<double>(d));
  std::mt19937_64 rng(
      DeriveSeed(opts_.seed, kOracleStream, static_cast<uint64_t>(iteration)));
  if (opts_.law == NoiseLaw::kGaussian) {
    // The mean of m i.i.d. N(0, s^2) draws is exactly N(0, s^2 / m).
    std::normal_distribution<double> normal(
        0.0, per_coord / std::sqrt(static_cast<double>(batch_size)));
    for (Eigen::Index i = 0; i < d; ++i) out.mean[i] += normal(rng);
    return out;
  }
  const HeavyTailSampler draw(opts_.law == NoiseLaw::kPareto
                                  ? HeavyTailDistribution::kPareto
                                  : HeavyTailDistribution::kStudentT,
                              opts_.tail_shape);
  Vector noise = Vector::Zero(d);
  for (int64_t s = 0; s < batch_size; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) noise[i] += draw(rng);
  }
  out.mean += (per_coord / static_cast<double>(batch_size)) * noise;
  return out;
}

std::string_view ScheduleSourceName(ScheduleSource source) {
  switch (source) {
    case ScheduleSource::kBoundedDomain:
      return "bounded_domain";
    case ScheduleSource::kUnboundedDomain:
      return "unbounded_domain";
    case ScheduleSource::kHolder:
      return "holder";
    case ScheduleSource::kManual:
      return "manual";
  }
  return "manual";
}

double NoiseRadiusFor(ScheduleSource source, const ScheduleInputs& in) {
  if (in.grad_std == 0.0 || std::isinf(in.epsilon)) return 0.0;
  const double n_iter = static_cast<double>(in.iterations);
  const double d = static_cast<double>(in.dim);
  const double n = static_cast<double>(in.n);
  const double s2 = in.grad_std * in.grad_std;
  const double log_inv_delta = std::log(1.0 / in.delta);
  switch (source) {
    case ScheduleSource::kUnboundedDomain: {
      const double log4n = std::log(4.0 * n_iter / in.beta);
      const double gamma = 1.0 / (24.0 * in.smoothness * log4n);
      return 648.0 * gamma * in.smoothness * n_iter * n_iter * n_iter * s2 *
             std::sqrt(d * n_iter * std::log(4.0 * n_iter * n_iter / in.beta) *
                       log_inv_delta) /
             (n * in.epsilon * log4n * log4n);
    }
    case ScheduleSource::kHolder:
      return 108.0 * std::pow(n_iter, 1.5) * s2 *
             std::sqrt(d * std::log(8.0 * n_iter / in.beta) * log_inv_delta) /
             (n * in.epsilon * std::log(8.0 / in.beta));
    case ScheduleSource::kBoundedDomain:
    case ScheduleSource::kManual:
      return 0.0;
  }
  return 0.0;
}

void Schedule::Validate() const {
  auto finite_pos = [](double v) { return v > 0 && std::isfinite(v); };
  if (!finite_pos(level) || !finite_pos(stepsize) || batch < 1 || iterations < 1) {
    throw InputError("schedule: lambda, gamma, m, N must be positive and finite");
  }
  if (!(noise_std >= 0) || !std::isfinite(noise_std) || !(noise_radius >= 0) ||
      !std::isfinite(noise_radius)) {
    throw InputError("schedule: sigma_hat and D must be nonnegative and finite");
  }
  if (source == ScheduleSource::kUnboundedDomain ||
      source == ScheduleSource::kHolder) {
    const double d = NoiseRadiusFor(source, inputs);
    if (std::abs(d - noise_radius) > 1e-12 * std::max(std::abs(d), 1e-300)) {
      throw InputError("schedule: D does not match its formula");
    }
  }
}

Schedule ScheduleBoundedDomain(double smoothness, double radius, double beta,
                               int64_t iterations, double grad_std) {
  CheckPositive(smoothness, "L");
  CheckPositive(radius, "R0");
  CheckBeta(beta);
  if (iterations < 1) throw InputError("N must be >= 1");
  if (!(grad_std >= 0)) throw InputError("sigma must be nonnegative");
  const double log4 = std::log(4.0 / beta);
  const double n_iter = static_cast<double>(iterations);
  Schedule s;
  s.source = ScheduleSource::kBoundedDomain;
  s.level = 2.0 * smoothness * radius;
  s.stepsize = 1.0 / (2.0 * smoothness * log4);
  s.batch = CeilBatch(81.0 * n_iter * n_iter * grad_std * grad_std /
                      (2.0 * smoothness * smoothness * radius * radius * log4 * log4));
  s.iterations = iterations;
  s.inputs = {.smoothness = smoothness,
              .radius = radius,
              .beta = beta,
              .iterations = iterations,
              .grad_std = grad_std};
  return s;
}

Schedule ScheduleUnbounded(const UnboundedParams& p) {
  CheckPositive(p.smoothness, "L");
  CheckPositive(p.radius, "R0");
  CheckBeta(p.beta);
  if (p.iterations < 1 || p.dim < 1 || p.n < 1) {
    throw InputError("N, d, n must be >= 1");
  }
  if (!(p.grad_std >= 0)) throw InputError("sigma must be nonnegative");
  CheckPrivacyInputs(p.epsilon, p.delta);
  const double n_iter = static_cast<double>(p.iterations);
  const double log4n = std::log(4.0 * n_iter / p.beta);

  Schedule s;
  s.source = ScheduleSource::kUnboundedDomain;
  s.iterations = p.iterations;
  s.inputs = {.smoothness = p.smoothness,
              .radius = p.radius,
              .beta = p.beta,
              .iterations = p.iterations,
              .grad_std = p.grad_std,
              .dim = p.dim,
              .n = p.n,
              .epsilon = p.epsilon,
              .delta = p.delta};
  s.stepsize = 1.0 / (24.0 * p.smoothness * log4n);
  s.noise_radius = NoiseRadiusFor(s.source, s.inputs);
  s.level = 4.0 * p.smoothness * p.radius + 2.0 * std::sqrt(s.noise_radius);
  s.batch = CeilBatch(162.0 * n_iter * n_iter * p.grad_std * p.grad_std /
                      (s.level * s.level * log4n * log4n));
  return s;
}

Schedule ScheduleHolder(const HolderParams& p) {
  if (!(p.holder_exponent >= 0.0 && p.holder_exponent <= 1.0)) {
    throw InputError("holder exponent must lie in [0, 1]");
  }
  CheckPositive(p.holder_constant, "M_nu");
  CheckPositive(p.radius, "R0");
  CheckPositive(p.alpha, "alpha");
  CheckBeta(p.beta);
  if (p.iterations < 1 || p.dim < 1 || p.n < 1) {
    throw InputError("N, d, n must be >= 1");
  }
  if (!(p.grad_std >= 0)) throw InputError("sigma must be nonnegative");
  CheckPrivacyInputs(p.epsilon, p.delta);

  constexpr double kC = 9.0;
  const double nu = p.holder_exponent;
  const double m_nu = p.holder_constant;
  const double n_iter = static_cast<double>(p.iterations);
  const double log8 = std::log(8.0 / p.beta);

  Schedule s;
  s.source = ScheduleSource::kHolder;
  s.iterations = p.iterations;
  s.inputs = {.smoothness = m_nu,
              .radius = p.radius,
              .beta = p.beta,
              .iterations = p.iterations,
              .grad_std = p.grad_std,
              .dim = p.dim,
              .n = p.n,
              .epsilon = p.epsilon,
              .delta = p.delta,
              .holder_exponent = nu,
              .alpha = p.alpha};
  s.level = 2.0 * m_nu * std::pow(kC, nu) * std::pow(p.radius, nu);
  s.noise_radius = NoiseRadiusFor(s.source, s.inputs);

  const double t1 = std::pow(p.alpha, (1.0 - nu) / (1.0 + nu)) /
                    (8.0 * std::pow(m_nu, 2.0 / (1.0 + nu)));
  const double t2 = p.radius / (std::sqrt(2.0 * n_iter) *
                                std::pow(p.alpha, nu / (1.0 + nu)) *
                                std::pow(m_nu, 1.0 / (1.0 + nu)));
  const double t3 = p.radius / (2.0 * s.level * log8);
  double gamma = std::min({t1, t2, t3});
  if (s.noise_radius > 0) {
    gamma = std::min(gamma, s.level * p.radius / (2.0 * s.noise_radius * n_iter));
  }
  s.stepsize = gamma;
  s.batch = CeilBatch(27.0 * n_iter * p.grad_std * p.grad_std /
                      (s.level * s.level * log8));
  return s;
}

Vector Project(const Vector& x, const ProjectionSpec& spec) {
  if (!spec.enabled) return x;
  if (!(spec.radius > 0)) throw InputError("projection radius must be positive");
  if (spec.center.size() != x.size()) {
    throw InputError("projection center has wrong dimension");
  }
  const Vector r = x - spec.center;
  const double dist = r.norm();
  if (dist <= spec.radius) return x;
  double factor = spec.radius / dist;
  Vector out = spec.center + factor * r;
  // Rounding may leave the point a hair outside; pull it in.
  while ((out - spec.center).norm() > spec.radius) {
    factor = std::nextafter(factor, 0.0);
    out = spec.center + factor * r;
  }
  return out;
}

double RunRecord::ClippedFraction() const {
  if (diagnostics.empty()) return 0.0;
  const auto clipped = std::count_if(diagnostics.begin(), diagnostics.end(),
                                     [](const auto& d) { return d.clipped; });
  return static_cast<double>(clipped) / static_cast<double>(diagnostics.size());
}

LedgerEntry MakeLedgerEntry(const Schedule& schedule, const PrivacyBudget& budget,
                            int64_t n, int stage) {
  return LedgerEntry{.stage = stage,
                     .mode = budget.mode,
                     .level = schedule.level,
                     .batch = schedule.batch,
                     .iterations = schedule.iterations,
                     .sigma = schedule.noise_std,
                     .epsilon = budget.epsilon,
                     .delta = budget.delta,
                     .n = n,
                     .abadi_c = budget.abadi_c};
}

RunRecord RunClippedDpsgd(const GradOracle& oracle, const Vector& x0,
                          const Schedule& schedule,
                          const ProjectionSpec& projection,
                          const PrivacyBudget& budget,
                          const RunOptions& options) {
  schedule.Validate();
  if (x0.size() != oracle.dim()) throw InputError("x0 has wrong dimension");
  if (!x0.allFinite()) throw InputError("x0 must be finite");

  RunRecord rec;
  rec.noise_seed = options.noise_seed;
  rec.ledger.entries.push_back(
      MakeLedgerEntry(schedule, budget, oracle.num_records(), 0));
  rec.ledger.declared_epsilon = budget.epsilon;
  rec.ledger.declared_delta = budget.delta;
  if (!LedgerVerify(rec.ledger)) {
    throw ConfigError("noise level " + std::to_string(schedule.noise_std) +
                      " does not match the " +
                      std::string(AccountantModeName(budget.mode)) +
                      " calibration for the declared budget");
  }
  rec.ledger.entries.front().stage = options.stage;

  const int64_t n_iter = schedule.iterations;
  const Eigen::Index d = x0.size();
  rec.start = x0;
  rec.diagnostics.reserve(static_cast<size_t>(n_iter));
  if (options.keep_iterates) {
    rec.iterates.emplace();
    rec.iterates->reserve(static_cast<size_t>(n_iter));
  }
  rec.checkpoints.push_back({0, x0});

  // Kahan-compensated running sum of the iterates.
  Vector sum = Vector::Zero(d);
  Vector comp = Vector::Zero(d);
  Vector x = x0;
  for (int64_t k = 0; k < n_iter; ++k) {
    const int64_t global_k = options.iteration_offset + k;
    if (options.keep_iterates) rec.iterates->push_back(x);
    {
      const Vector y = x - comp;
      const Vector t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }

    const BatchGradient batch = oracle.BatchMean(x, schedule.batch, global_k);
    const EstimatorOutput est = PrivatizeMean(
        batch.mean, schedule.level, schedule.noise_std,
        DeriveSeed(options.noise_seed, kNoiseStream, static_cast<uint64_t>(global_k)));
    rec.diagnostics.push_back(
        {.pre_clip_norm = est.pre_clip_norm,
         .clipped = est.clipped,
         .batch_size = batch.batch_size,
         .loss = options.record_loss ? oracle.Objective(x)
                                     : std::numeric_limits<double>::quiet_NaN()});

    x -= schedule.stepsize * est.value;
    if (projection.enabled) x = Project(x, projection);
    if (!x.allFinite()) {
      throw RunError("non-finite iterate at iteration " + std::to_string(global_k),
                     global_k, options.stage);
    }

    const int64_t done = k + 1;
    if ((options.checkpoint_every > 0 && done % options.checkpoint_every == 0) ||
        done == n_iter) {
      rec.checkpoints.push_back({done, sum / static_cast<double>(done)});
    }
  }
  rec.average = sum / static_cast<double>(n_iter);
  rec.last = std::move(x);
  return rec;
}

}  // namespace dpclip
