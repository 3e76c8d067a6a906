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
#ifndef DPCLIP_DATA_H_
#define DPCLIP_DATA_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dpclip/common.h"
#include "dpclip/dataset.h"
#include "dpclip/problems.h"

namespace dpclip {

// Reads LIBSVM text: "<label> <idx>:<val> ..." with 1-based indices. Blank
// lines are skipped. Throws InputError naming the line number on a malformed
// token or non-increasing indices.
Dataset ParseLibsvm(std::istream& in);
Dataset ParseLibsvm(std::string_view text);
Dataset LoadLibsvmFile(const std::string& path);

// Canonical LIBSVM text (shortest round-trip number formatting). Parsing the
// output reproduces the dataset exactly.
std::string SerializeLibsvm(const Dataset& data);

// First `count` examples (all of them if count >= size). Used for the fixed
// train/test split of file-backed datasets.
Dataset TakeFirst(const Dataset& data, int64_t count);

enum class HeavyTailDistribution { kPareto, kStudentT, kLogNormal };

// Coordinate-wise law for synthetic features and label noise. `shape` is the
// Pareto tail index, the Student-t degrees of freedom, or the log-scale of
// the lognormal. Features are centered and scaled to standard deviation
// `scale`; ridge label noise is the same law scaled to `noise_scale`.
struct HeavyTailSpec {
  HeavyTailDistribution distribution = HeavyTailDistribution::kPareto;
  double shape = 2.2;
  double scale = 1.0;
  double noise_scale = 0.1;
  int32_t dim = 10;
  uint64_t seed = 0;
  // Admit tail parameters with infinite variance (pareto shape <= 2,
  // student-t dof <= 2). Such draws are centered but not standardized.
  bool allow_infinite_variance = false;

  // Throws ConfigError for an infinite-variance law without the override and
  // InputError for nonpositive parameters.
  void Validate() const;
  bool HasFiniteVariance() const;
};

// Stateless unit-law sampler: centered draws with variance 1 when the law
// has finite variance.
class HeavyTailSampler {
 public:
  HeavyTailSampler(HeavyTailDistribution distribution, double shape);

  double operator()(std::mt19937_64& rng) const;

 private:
  double Raw(std::mt19937_64& rng) const;

  HeavyTailDistribution distribution_;
  double shape_;
  double center_ = 0.0;
  double inv_sd_ = 1.0;
};

// Synthetic planted problem. Ridge labels are <x_true, xi> + noise; logistic
// labels are the sign of the same quantity. Fully determined by spec.seed.
Dataset GenerateHeavyTailed(const HeavyTailSpec& spec, int64_t n,
                            const LossKind& loss, const Vector& x_true);

// E||grad f(x_true, xi)||^2 for the ridge generator at the planted point:
// 4 * noise_scale^2 * dim * scale^2.
double RidgeNoiseVarianceAtTruth(const HeavyTailSpec& spec);

enum class SamplingMode { kPoisson, kWithReplacement };

// `seed` selects the batch stream; the batch size (or Poisson rate m/n) is
// supplied per draw by the schedule.
struct SamplerSpec {
  SamplingMode mode = SamplingMode::kWithReplacement;
  uint64_t seed = 0;
};

// Indices of the batch for iteration k. Poisson mode includes each example
// independently with probability batch_size / n (which must be <= 1) and may
// return an empty batch; with_replacement returns exactly batch_size uniform
// draws. A pure function of (dataset size, sampler, batch_size, k).
std::vector<int64_t> DrawBatch(const Dataset& data, const SamplerSpec& sampler,
                               int64_t batch_size, int64_t iteration);

}  // namespace dpclip

#endif  // DPCLIP_DATA_H_
