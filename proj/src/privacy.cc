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
#include "dpclip/privacy.h"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "dpclip/common.h"

namespace dpclip {
namespace {

constexpr double kLedgerRelTol = 1e-12;

void CheckDelta(double delta) {
  if (!(delta > 0 && delta < 1)) throw InputError("delta must lie in (0, 1)");
}

void CheckEpsilon(double epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw InputError("epsilon must be positive and finite");
  }
}

bool RelClose(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= kLedgerRelTol * std::max(std::abs(a), std::abs(b));
}

std::string Num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string_view AccountantModeName(AccountantMode mode) {
  switch (mode) {
    case AccountantMode::kAbadiConstant:
      return "abadi";
    case AccountantMode::kStrongComposition:
      return "strong";
    case AccountantMode::kNone:
      return "none";
  }
  return "none";
}

AccountantMode ParseAccountantMode(std::string_view name) {
  if (name == "abadi" || name == "abadi_constant") return AccountantMode::kAbadiConstant;
  if (name == "strong" || name == "strong_composition") {
    return AccountantMode::kStrongComposition;
  }
  if (name == "none") return AccountantMode::kNone;
  throw ConfigError("unknown accountant mode '" + std::string(name) + "'");
}

void PrivacyBudget::Validate() const {
  if (mode == AccountantMode::kNone) return;
  CheckEpsilon(epsilon);
  CheckDelta(delta);
  if (!(abadi_c > 0) || !(regime_c1 > 0)) {
    throw InputError("accountant constants must be positive");
  }
}

double CalibrateSigma(double level, int64_t batch, int64_t iterations,
                      int64_t n, const PrivacyBudget& budget) {
  if (budget.mode != AccountantMode::kAbadiConstant) {
    throw InputError("CalibrateSigma requires the abadi_constant accountant");
  }
  budget.Validate();
  if (!(level > 0) || batch < 1 || iterations < 1 || n < 1) {
    throw InputError("CalibrateSigma: lambda, m, N, n must be positive");
  }
  return budget.abadi_c * level * static_cast<double>(batch) *
         std::sqrt(static_cast<double>(iterations) * std::log(1.0 / budget.delta)) /
         (static_cast<double>(n) * budget.epsilon);
}

bool CheckEpsilonRegime(double epsilon, int64_t iterations, int64_t batch,
                        int64_t n, double regime_c1) {
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(batch);
  return epsilon <= regime_c1 * static_cast<double>(iterations) * md * md / (nd * nd);
}

double GaussianMechanismSigma(double sensitivity, double epsilon, double delta) {
  CheckEpsilon(epsilon);
  CheckDelta(delta);
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
}

double CalibrateSigmaStrong(double level, int64_t batch, int64_t iterations,
                            const PrivacyBudget& budget) {
  if (budget.mode != AccountantMode::kStrongComposition) {
    throw InputError("CalibrateSigmaStrong requires the strong_composition accountant");
  }
  budget.Validate();
  if (!(level > 0) || batch < 1 || iterations < 1) {
    throw InputError("CalibrateSigmaStrong: lambda, m, N must be positive");
  }
  const StageBudget per_step = SplitBudget(budget.epsilon, budget.delta,
                                           static_cast<int>(iterations));
  return GaussianMechanismSigma(2.0 * level, per_step.epsilon, per_step.delta);
}

StageBudget SplitBudget(double epsilon, double delta, int stages) {
  CheckEpsilon(epsilon);
  CheckDelta(delta);
  if (stages < 1) throw InputError("SplitBudget: stage count must be >= 1");
  const double tau = static_cast<double>(stages);
  return StageBudget{
      .epsilon = epsilon / (2.0 * std::sqrt(2.0 * tau * std::log(2.0 / delta))),
      .delta = delta / (2.0 * tau),
      .stages = stages};
}

EpsilonDelta RecombineStages(const StageBudget& stage) {
  const double tau = static_cast<double>(stage.stages);
  const double delta = 2.0 * tau * stage.delta;
  return {2.0 * stage.epsilon * std::sqrt(2.0 * tau * std::log(2.0 / delta)),
          delta};
}

std::string PrivacyLedger::Serialize() const {
  std::ostringstream out;
  out << "total " << Num(declared_epsilon) << ' ' << Num(declared_delta) << ' '
      << (composition == Composition::kSingle ? "single" : "advanced") << '\n';
  for (const auto& e : entries) {
    out << e.stage << ' ' << AccountantModeName(e.mode) << ' ' << Num(e.level)
        << ' ' << e.batch << ' ' << e.iterations << ' ' << Num(e.sigma) << ' '
        << Num(e.epsilon) << ' ' << Num(e.delta) << ' ' << e.n << ' '
        << Num(e.abadi_c) << '\n';
  }
  return out.str();
}

PrivacyLedger PrivacyLedger::Parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  PrivacyLedger ledger;
  std::string word, comp;
  if (!(in >> word) || word != "total" ||
      !(in >> ledger.declared_epsilon >> ledger.declared_delta >> comp)) {
    throw InputError("ledger: missing 'total' header");
  }
  if (comp == "single") {
    ledger.composition = Composition::kSingle;
  } else if (comp == "advanced") {
    ledger.composition = Composition::kAdvanced;
  } else {
    throw InputError("ledger: unknown composition '" + comp + "'");
  }
  LedgerEntry e;
  std::string mode;
  while (in >> e.stage >> mode >> e.level >> e.batch >> e.iterations >> e.sigma >>
         e.epsilon >> e.delta >> e.n >> e.abadi_c) {
    e.mode = ParseAccountantMode(mode);
    ledger.entries.push_back(e);
  }
  if (!in.eof()) throw InputError("ledger: malformed entry line");
  return ledger;
}

bool LedgerVerify(const PrivacyLedger& ledger) {
  if (ledger.entries.empty()) return false;
  const AccountantMode mode = ledger.entries.front().mode;
  for (size_t i = 0; i < ledger.entries.size(); ++i) {
    const LedgerEntry& e = ledger.entries[i];
    if (e.mode != mode || e.stage != static_cast<int>(i)) return false;
    if (!(e.sigma >= 0)) return false;
    if (mode == AccountantMode::kNone) continue;
    const PrivacyBudget b{.epsilon = e.epsilon,
                          .delta = e.delta,
                          .mode = mode,
                          .abadi_c = e.abadi_c};
    double expected = 0.0;
    try {
      expected = mode == AccountantMode::kAbadiConstant
                     ? CalibrateSigma(e.level, e.batch, e.iterations, e.n, b)
                     : CalibrateSigmaStrong(e.level, e.batch, e.iterations, b);
    } catch (const InputError&) {
      return false;
    }
    if (!RelClose(expected, e.sigma)) return false;
  }
  if (mode == AccountantMode::kNone) return true;

  const LedgerEntry& first = ledger.entries.front();
  if (ledger.composition == Composition::kSingle) {
    return ledger.entries.size() == 1 &&
           RelClose(first.epsilon, ledger.declared_epsilon) &&
           RelClose(first.delta, ledger.declared_delta);
  }
  for (const auto& e : ledger.entries) {
    if (e.epsilon != first.epsilon || e.delta != first.delta) return false;
  }
  const EpsilonDelta total = RecombineStages(
      {first.epsilon, first.delta, static_cast<int>(ledger.entries.size())});
  return RelClose(total.epsilon, ledger.declared_epsilon) &&
         RelClose(total.delta, ledger.declared_delta);
}

}  // namespace dpclip
