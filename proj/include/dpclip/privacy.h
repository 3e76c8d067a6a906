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
#ifndef DPCLIP_PRIVACY_H_
#define DPCLIP_PRIVACY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dpclip {

// How the Gaussian noise level of a run is tied to (epsilon, delta).
//   kAbadiConstant: sigma = c * lambda * m * sqrt(N ln(1/delta)) / (n eps),
//     the moments-accountant form with an unspecified constant c, valid only
//     for eps <= c1 * N m^2 / n^2.
//   kStrongComposition: per-step Gaussian mechanism with sensitivity 2*lambda
//     composed over N steps by advanced composition. Provable, conservative.
//   kNone: no accounting; any noise level is accepted.
enum class AccountantMode { kAbadiConstant, kStrongComposition, kNone };

std::string_view AccountantModeName(AccountantMode mode);
AccountantMode ParseAccountantMode(std::string_view name);

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
  AccountantMode mode = AccountantMode::kAbadiConstant;
  double abadi_c = 1.0;
  double regime_c1 = 1.0;

  void Validate() const;
};

// Per-stage budget for a tau-stage sequential composition.
struct StageBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  int stages = 1;
};

double CalibrateSigma(double level, int64_t batch, int64_t iterations,
                      int64_t n, const PrivacyBudget& budget);

// eps <= c1 * N * m^2 / n^2.
bool CheckEpsilonRegime(double epsilon, int64_t iterations, int64_t batch,
                        int64_t n, double regime_c1);

// sqrt(2 ln(1.25/delta)) * sensitivity / epsilon.
double GaussianMechanismSigma(double sensitivity, double epsilon, double delta);

// Splits (eps, delta) over the N steps (eps0 = eps / (2 sqrt(2N ln(2/delta))),
// delta0 = delta / (2N)) and applies the Gaussian mechanism with sensitivity
// 2 * level at each step. `batch` does not enter: no amplification by
// subsampling is claimed.
double CalibrateSigmaStrong(double level, int64_t batch, int64_t iterations,
                            const PrivacyBudget& budget);

// eps_hat = eps / (2 sqrt(2 tau ln(2/delta))), delta_hat = delta / (2 tau).
StageBudget SplitBudget(double epsilon, double delta, int stages);

// Inverse of SplitBudget: the total (eps, delta) guaranteed by `stages`
// mechanisms that are each (eps_hat, delta_hat)-DP.
struct EpsilonDelta {
  double epsilon = 0.0;
  double delta = 0.0;
};
EpsilonDelta RecombineStages(const StageBudget& stage);

// One calibrated run. `epsilon`/`delta` are the budget the run was calibrated
// against (the full budget for a single run, the stage budget for restarts).
struct LedgerEntry {
  int stage = 0;
  AccountantMode mode = AccountantMode::kNone;
  double level = 0.0;
  int64_t batch = 0;
  int64_t iterations = 0;
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int64_t n = 0;
  double abadi_c = 1.0;
};

enum class Composition { kSingle, kAdvanced };

// Audit record. Serialized as a header line
//   total <eps> <delta> <single|advanced>
// followed by one line per entry:
//   <stage> <mode> <lambda> <m> <N> <sigma> <eps_hat> <delta_hat> <n> <c>
struct PrivacyLedger {
  std::vector<LedgerEntry> entries;
  double declared_epsilon = 0.0;
  double declared_delta = 0.0;
  Composition composition = Composition::kSingle;

  std::string Serialize() const;
  static PrivacyLedger Parse(std::string_view text);
};

// Recomputes every entry's sigma from its recorded parameters under its mode
// and recombines the entry budgets into a total, comparing against the
// declared total (relative tolerance 1e-12). Mixed modes, a non-single stage
// count under kSingle, or unequal stage budgets fail verification.
bool LedgerVerify(const PrivacyLedger& ledger);

}  // namespace dpclip

#endif  // DPCLIP_PRIVACY_H_
