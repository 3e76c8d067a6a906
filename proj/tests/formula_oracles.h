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
// Second, long-double evaluations of the closed-form schedules and
// calibrations. Written from the formulas, not from the library code.

#ifndef DPCLIP_TESTS_FORMULA_ORACLES_H_
#define DPCLIP_TESTS_FORMULA_ORACLES_H_

#include <algorithm>
#include <cmath>

namespace dpclip::oracle {

using LD = long double;

struct BoundedSchedule {
  LD level, gamma, batch_raw;
};

inline BoundedSchedule BoundedDomain(LD L, LD R, LD beta, LD N, LD sigma) {
  const LD a = std::log(4 / beta);
  return {2 * L * R, 1 / (2 * L * a), 81 * N * N * sigma * sigma / (2 * L * L * R * R * a * a)};
}

struct UnboundedSchedule {
  LD gamma, d, level, batch_raw;
};

inline UnboundedSchedule UnboundedDomain(LD L, LD R, LD beta, LD N, LD sigma, LD d, LD n,
                                         LD eps, LD delta) {
  const LD l4n = std::log(4 * N / beta);
  UnboundedSchedule o;
  o.gamma = 1 / (24 * L * l4n);
  o.d = std::isinf(eps) ? 0
                        : 648 * o.gamma * L * N * N * N * sigma * sigma *
                              std::sqrt(d * N * std::log(4 * N * N / beta) * std::log(1 / delta)) /
                              (n * eps * l4n * l4n);
  o.level = 4 * L * R + 2 * std::sqrt(o.d);
  o.batch_raw = 162 * N * N * sigma * sigma / (o.level * o.level * l4n * l4n);
  return o;
}

struct HolderSchedule {
  LD level, d, gamma, batch_raw;
};

inline HolderSchedule Holder(LD M, LD nu, LD R, LD beta, LD N, LD sigma, LD d, LD n, LD eps,
                             LD delta, LD alpha) {
  HolderSchedule o;
  const LD l8 = std::log(8 / beta);
  o.level = 2 * M * std::pow(9.0L, nu) * std::pow(R, nu);
  o.d = 108 * std::pow(N, 1.5L) * sigma * sigma *
        std::sqrt(d * std::log(8 * N / beta) * std::log(1 / delta)) / (n * eps * l8);
  LD g = std::pow(alpha, (1 - nu) / (1 + nu)) / (8 * std::pow(M, 2 / (1 + nu)));
  g = std::min(g, R / (std::sqrt(2 * N) * std::pow(alpha, nu / (1 + nu)) *
                       std::pow(M, 1 / (1 + nu))));
  g = std::min(g, R / (2 * o.level * l8));
  if (o.d > 0) g = std::min(g, o.level * R / (2 * o.d * N));
  o.gamma = g;
  o.batch_raw = 27 * N * sigma * sigma / (o.level * o.level * l8);
  return o;
}

inline LD AbadiSigma(LD level, LD m, LD N, LD n, LD eps, LD delta, LD c = 1) {
  return c * level * m * std::sqrt(N * std::log(1 / delta)) / (n * eps);
}

// Per-step Gaussian mechanism on a batch mean of sensitivity 2 lambda.
inline LD StrongSigma(LD level, LD N, LD eps, LD delta) {
  const LD e0 = eps / (2 * std::sqrt(2 * N * std::log(2 / delta)));
  const LD d0 = delta / (2 * N);
  return 2 * level * std::sqrt(2 * std::log(1.25L / d0)) / e0;
}

struct Split {
  LD epsilon, delta;
};

inline Split SplitBudget(LD eps, LD delta, LD tau) {
  return {eps / (2 * std::sqrt(2 * tau * std::log(2 / delta))), delta / (2 * tau)};
}

inline LD DeviationBound(LD k, LD level, LD beta, LD n, LD sigma, LD d) {
  const LD a = std::log(4 / beta);
  LD b = level * (4 * a + a / 3 + 2 * a * a / (81 * n));
  if (k > 0) b += k * sigma * std::sqrt(16 * d * std::log(4 * k / beta));
  return b;
}

inline LD SuggestIterations(LD r0, LD n, LD eps, LD d, LD delta) {
  const LD base = r0 * r0 * n * eps / std::sqrt(d * std::log(1 / delta));
  return std::max<LD>(1, std::ceil(std::pow(base, 2 / 7.0L)));
}

}  // namespace dpclip::oracle

#endif  // DPCLIP_TESTS_FORMULA_ORACLES_H_
