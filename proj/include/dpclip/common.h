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
#ifndef DPCLIP_COMMON_H_
#define DPCLIP_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dpclip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bad arguments to an operation: dimension mismatch, out-of-range parameter,
// malformed input text.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration that cannot be executed as requested, e.g. a privacy
// regime check that fails with no fallback, or an infinite-variance
// generator without the override flag.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run that diverged. `iteration` is the global iteration index at which a
// non-finite iterate appeared; `stage` is -1 outside restarted runs.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, int64_t iteration, int stage = -1)
      : std::runtime_error(what), iteration_(iteration), stage_(stage) {}

  int64_t iteration() const { return iteration_; }
  int stage() const { return stage_; }

 private:
  int64_t iteration_;
  int stage_;
};

// A deterministic solver that stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_grad_norm)
      : std::runtime_error(what), last_grad_norm_(last_grad_norm) {}

  double last_grad_norm() const { return last_grad_norm_; }

 private:
  double last_grad_norm_;
};

// Mixes a base seed with a stream id and a counter into an independent
// 64-bit seed (splitmix64 finalizer applied twice). Used so that every
// (seed, iteration) pair owns a reproducible random stream.
inline uint64_t DeriveSeed(uint64_t base, uint64_t stream, uint64_t counter) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base ^ mix(stream)) + counter);
}

inline bool AllFinite(const Vector& v) { return v.allFinite(); }

}  // namespace dpclip

#endif  // DPCLIP_COMMON_H_
