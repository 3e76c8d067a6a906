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
#include "dpclip/clipping.h"

#include <cmath>
#include <random>

namespace dpclip {

void ClipParams::Validate() const {
  if (!(level > 0)) throw InputError("clip level must be positive");
  if (batch < 1) throw InputError("batch size must be positive");
}

namespace {

// Plain norm, falling back to the scaled one when squares overflow.
double SafeNorm(const Vector& v) {
  const double n = v.norm();
  return std::isfinite(n) ? n : v.stableNorm();
}

}  // namespace

ClipResult ClipWithNorm(const Vector& g, double level) {
  if (!(level > 0) || !std::isfinite(level)) {
    throw InputError("clip level must be positive and finite");
  }
  if (!g.allFinite()) throw InputError("clip input has non-finite coordinates");
  const double norm = SafeNorm(g);
  if (norm <= level) return {g, norm, false};

  // Shrink the factor by ulps until rounding can no longer push the result
  // past the sphere.
  double factor = level / norm;
  Vector out = factor * g;
  while (SafeNorm(out) > level) {
    factor = std::nextafter(factor, 0.0);
    out = factor * g;
  }
  return {std::move(out), norm, true};
}

Vector Clip(const Vector& g, double level) {
  return ClipWithNorm(g, level).value;
}

Vector ClippedBatchMean(std::span<const Vector> batch, Eigen::Index dim,
                        double level) {
  Vector mean = Vector::Zero(dim);
  if (batch.empty()) {
    if (!(level > 0)) throw InputError("clip level must be positive");
    return mean;
  }
  for (const auto& g : batch) {
    if (g.size() != dim) throw InputError("batch gradients have mixed dimensions");
    mean += g;
  }
  mean /= static_cast<double>(batch.size());
  return Clip(mean, level);
}

EstimatorOutput PrivatizeMean(const Vector& batch_mean, double level,
                              double noise_std, uint64_t noise_seed) {
  if (!(noise_std >= 0)) throw InputError("noise std must be nonnegative");
  ClipResult c = ClipWithNorm(batch_mean, level);
  EstimatorOutput out;
  out.pre_clip_norm = c.pre_clip_norm;
  out.clipped = c.clipped;
  out.noise_seed = noise_seed;
  out.noise = Vector::Zero(batch_mean.size());
  if (noise_std > 0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal(0.0, noise_std);
    for (Eigen::Index i = 0; i < out.noise.size(); ++i) out.noise[i] = normal(rng);
    out.value = c.value + out.noise;
  } else {
    out.value = std::move(c.value);
  }
  return out;
}

EstimatorOutput PrivateClippedMean(std::span<const Vector> batch,
                                   Eigen::Index dim, double level,
                                   double noise_std, uint64_t noise_seed) {
  Vector mean = Vector::Zero(dim);
  for (const auto& g : batch) {
    if (g.size() != dim) throw InputError("batch gradients have mixed dimensions");
    mean += g;
  }
  if (!batch.empty()) mean /= static_cast<double>(batch.size());
  return PrivatizeMean(mean, level, noise_std, noise_seed);
}

double DeviationBound(int64_t k, double level, double beta, int64_t iterations,
                      double noise_std, int64_t dim) {
  if (!(beta > 0 && beta < 1)) throw InputError("beta must lie in (0, 1)");
  if (iterations < 1 || k < 0 || k > iterations) {
    throw InputError("deviation bound needs 0 <= k <= N and N >= 1");
  }
  if (!(level > 0) || !(noise_std >= 0) || dim < 1) {
    throw InputError("deviation bound needs level > 0, noise >= 0, d >= 1");
  }
  const double a = std::log(4.0 / beta);
  const double clip_part =
      level * (4.0 * a + a / 3.0 + 2.0 * a * a / (81.0 * iterations));
  if (k == 0) return clip_part;
  const double kd = static_cast<double>(k);
  return clip_part +
         kd * noise_std * std::sqrt(16.0 * dim * std::log(4.0 * kd / beta));
}

}  // namespace dpclip
