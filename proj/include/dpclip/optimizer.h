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
#ifndef DPCLIP_OPTIMIZER_H_
#define DPCLIP_OPTIMIZER_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dpclip/common.h"
#include "dpclip/data.h"
#include "dpclip/dataset.h"
#include "dpclip/privacy.h"
#include "dpclip/problems.h"

namespace dpclip {

// Mean of the per-sample gradients in one batch.
struct BatchGradient {
  Vector mean;
  int64_t batch_size = 0;
};

// Stochastic first-order oracle. BatchMean must be a pure function of
// (x, batch_size, iteration) so runs replay exactly.
class GradOracle {
 public:
  virtual ~GradOracle() = default;

  virtual Eigen::Index dim() const = 0;
  // Record count n used by the noise calibration.
  virtual int64_t num_records() const = 0;
  virtual BatchGradient BatchMean(const Vector& x, int64_t batch_size,
                                  int64_t iteration) const = 0;
  // Objective and exact gradient of the function being minimized (the
  // empirical risk for dataset-backed oracles).
  virtual double Objective(const Vector& x) const = 0;
  virtual Vector FullGradient(const Vector& x) const = 0;
};

// Samples batches from a dataset. Holds references; the dataset and loss
// must outlive the oracle.
class DatasetOracle : public GradOracle {
 public:
  DatasetOracle(const Dataset& data, const LossKind& loss, SamplerSpec sampler);

  Eigen::Index dim() const override { return dim_; }
  int64_t num_records() const override { return data_.size(); }
  BatchGradient BatchMean(const Vector& x, int64_t batch_size,
                          int64_t iteration) const override;
  double Objective(const Vector& x) const override;
  Vector FullGradient(const Vector& x) const override;

 private:
  const Dataset& data_;
  const LossKind& loss_;
  SamplerSpec sampler_;
  Eigen::Index dim_;
};

enum class NoiseLaw { kGaussian, kPareto, kStudentT };

// f(x) = 0.5 (x - c)^T diag(h) (x - c) with per-sample gradients
// diag(h)(x - c) + noise, E||noise||^2 = noise_std^2. Gaussian batch means
// are drawn exactly in O(d); heavy-tailed laws draw every sample.
class QuadraticOracle : public GradOracle {
 public:
  struct Options {
    Vector curvatures;
    Vector center;
    double noise_std = 0.0;
    NoiseLaw law = NoiseLaw::kGaussian;
    double tail_shape = 3.0;
    int64_t num_records = 1;
    uint64_t seed = 0;
  };

  explicit QuadraticOracle(Options options);

  Eigen::Index dim() const override { return opts_.curvatures.size(); }
  int64_t num_records() const override { return opts_.num_records; }
  BatchGradient BatchMean(const Vector& x, int64_t batch_size,
                          int64_t iteration) const override;
  double Objective(const Vector& x) const override;
  Vector FullGradient(const Vector& x) const override;

  const Vector& center() const { return opts_.center; }

 private:
  Options opts_;
};

enum class ScheduleSource { kBoundedDomain, kUnboundedDomain, kHolder, kManual };
std::string_view ScheduleSourceName(ScheduleSource source);

// The values each formula chain consumed, kept so a schedule can be
// re-derived and audited.
struct ScheduleInputs {
  double smoothness = 0.0;  // L (or M_nu for the Holder chain)
  double radius = 0.0;      // R0
  double beta = 0.0;
  int64_t iterations = 0;
  double grad_std = 0.0;    // sigma
  int64_t dim = 0;
  int64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double holder_exponent = 1.0;
  double alpha = 0.0;
};

// Resolved hyperparameters for one run of the clipped optimizer.
struct Schedule {
  double level = 0.0;        // lambda
  int64_t batch = 1;         // m
  double stepsize = 0.0;     // gamma
  int64_t iterations = 1;    // N
  double noise_std = 0.0;    // sigma_hat
  double noise_radius = 0.0; // D
  ScheduleSource source = ScheduleSource::kManual;
  ScheduleInputs inputs;

  // Finite, positive fields (noise_std, noise_radius >= 0), and for the
  // unbounded and Holder chains D equal to its formula re-evaluated from
  // `inputs`. Throws InputError.
  void Validate() const;
};

// Bounded domain: lambda = 2 L R0, gamma = 1/(2 L ln(4/beta)),
// m = max(1, ceil(81 N^2 sigma^2 / (2 L^2 R0^2 ln^2(4/beta)))).
Schedule ScheduleBoundedDomain(double smoothness, double radius, double beta,
                               int64_t iterations, double grad_std);

// `epsilon` may be +infinity for noise-free runs, which makes D = 0.
struct UnboundedParams {
  double smoothness = 0.0;
  double radius = 0.0;
  double beta = 0.0;
  int64_t iterations = 0;
  double grad_std = 0.0;
  int64_t dim = 0;
  int64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Unbounded domain, evaluated gamma -> D -> lambda -> m:
//   gamma = 1/(24 L ln(4N/beta))
//   D = 648 gamma L N^3 sigma^2 sqrt(d N ln(4N^2/beta) ln(1/delta))
//       / (n eps ln^2(4N/beta))
//   lambda = 4 L R0 + 2 sqrt(D)
//   m = max(1, ceil(162 N^2 sigma^2 / (lambda^2 ln^2(4N/beta)))).
Schedule ScheduleUnbounded(const UnboundedParams& p);

struct HolderParams {
  double holder_constant = 0.0;  // M_nu
  double holder_exponent = 1.0;  // nu
  double radius = 0.0;
  double beta = 0.0;
  int64_t iterations = 0;
  double grad_std = 0.0;
  int64_t dim = 0;
  int64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
};

// Holder-continuous gradients with C = 9:
//   lambda = 2 M C^nu R0^nu
//   D = 108 N^1.5 sigma^2 sqrt(d ln(8N/beta) ln(1/delta)) / (n eps ln(8/beta))
//   gamma = min{alpha^((1-nu)/(1+nu)) / (8 M^(2/(1+nu))),
//               R0 / (sqrt(2N) alpha^(nu/(1+nu)) M^(1/(1+nu))),
//               R0 / (2 lambda ln(8/beta)),
//               lambda R0 / (2 D N)}   (last term dropped when D = 0)
//   m = max(1, ceil(27 N sigma^2 / (lambda^2 ln(8/beta)))).
Schedule ScheduleHolder(const HolderParams& p);

// Re-evaluates D from a schedule's inputs for its source.
double NoiseRadiusFor(ScheduleSource source, const ScheduleInputs& in);

struct ProjectionSpec {
  Vector center;
  double radius = 1.0;
  bool enabled = false;
};

// Euclidean projection onto the closed ball; identity when disabled.
Vector Project(const Vector& x, const ProjectionSpec& spec);

struct RunOptions {
  uint64_t noise_seed = 0;
  bool keep_iterates = false;
  // Evaluate the objective at every iterate into the diagnostics.
  bool record_loss = false;
  // Store the running average every `checkpoint_every` iterations (0: only
  // the start and the end).
  int64_t checkpoint_every = 0;
  // Offset added to k for batch and noise streams, so consecutive stages of
  // a restarted run draw fresh randomness.
  int64_t iteration_offset = 0;
  int stage = 0;
};

struct IterationDiagnostics {
  double pre_clip_norm = 0.0;
  bool clipped = false;
  int64_t batch_size = 0;
  double loss = 0.0;  // NaN unless record_loss
};

struct Checkpoint {
  int64_t iteration = 0;  // number of iterates averaged
  Vector average;         // x^0 when iteration == 0
};

struct RunRecord {
  Vector start;
  Vector average;  // (1/N) sum_{k<N} x^k
  Vector last;     // x^N
  std::optional<std::vector<Vector>> iterates;  // x^0 .. x^{N-1}
  std::vector<IterationDiagnostics> diagnostics;
  std::vector<Checkpoint> checkpoints;
  uint64_t noise_seed = 0;
  // Single-run ledger declaring the budget the run was calibrated against.
  PrivacyLedger ledger;

  double ClippedFraction() const;
};

// Ledger entry describing a run with this schedule and budget.
LedgerEntry MakeLedgerEntry(const Schedule& schedule, const PrivacyBudget& budget,
                            int64_t n, int stage);

// Clipped noisy SGD. Per iteration: draw the batch mean, clip once, add
// N(0, noise_std^2 I), take a step, and project when `projection` is enabled.
// Returns the average of x^0..x^{N-1}. Verifies the run's privacy ledger
// before touching the oracle (ConfigError on mismatch) and aborts with
// RunError on a non-finite iterate.
RunRecord RunClippedDpsgd(const GradOracle& oracle, const Vector& x0,
                          const Schedule& schedule,
                          const ProjectionSpec& projection,
                          const PrivacyBudget& budget,
                          const RunOptions& options = {});

}  // namespace dpclip

#endif  // DPCLIP_OPTIMIZER_H_
