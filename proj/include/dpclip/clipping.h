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
#ifndef DPCLIP_CLIPPING_H_
#define DPCLIP_CLIPPING_H_

#include <cstdint>
#include <span>

#include "dpclip/common.h"

namespace dpclip {

struct ClipParams {
  double level = 1.0;  // lambda
  int64_t batch = 1;   // m

  void Validate() const;
};

// Returns g when ||g||_2 <= level, otherwise g rescaled onto the sphere of
// radius `level`. The result satisfies ||clip(g)||_2 <= level exactly in
// floating point. Throws InputError on non-finite input or level <= 0.
Vector Clip(const Vector& g, double level);

struct ClipResult {
  Vector value;
  double pre_clip_norm = 0.0;
  bool clipped = false;
};
ClipResult ClipWithNorm(const Vector& g, double level);

// Averages the batch, then clips the average once. An empty batch yields the
// zero vector of dimension `dim`.
Vector ClippedBatchMean(std::span<const Vector> batch, Eigen::Index dim,
                        double level);

struct EstimatorOutput {
  Vector value;  // clipped mean + noise
  Vector noise;  // the Gaussian draw z
  double pre_clip_norm = 0.0;
  bool clipped = false;
  uint64_t noise_seed = 0;
};

// clip(batch mean) + z with z ~ N(0, noise_std^2 I). The draw is a pure
// function of `noise_seed`. noise_std == 0 returns the clipped mean exactly.
EstimatorOutput PrivatizeMean(const Vector& batch_mean, double level,
                              double noise_std, uint64_t noise_seed);
EstimatorOutput PrivateClippedMean(std::span<const Vector> batch,
                                   Eigen::Index dim, double level,
                                   double noise_std, uint64_t noise_seed);

// High-probability bound on sum_t ||noisy estimate_t - grad f(x^t)|| over the
// first k estimates of a run of length N, valid while ||grad f|| <= level/2:
//   level * (4A + A/3 + 2A^2/(81N)) + k * noise_std * sqrt(16 d ln(4k/beta))
// with A = ln(4/beta). The noise term is 0 at k = 0.
double DeviationBound(int64_t k, double level, double beta, int64_t iterations,
                      double noise_std, int64_t dim);

}  // namespace dpclip

#endif  // DPCLIP_CLIPPING_H_
