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
#ifndef DPCLIP_PROBLEMS_H_
#define DPCLIP_PROBLEMS_H_

#include <cstdint>
#include <functional>
#include <string>

#include "dpclip/common.h"
#include "dpclip/dataset.h"

namespace dpclip {

enum class ConvexityClass { kConvexSmooth, kStronglyConvex, kHolder };

// Problem constants consumed by the schedule builders. `grad_variance` is
// the bound sigma with E||grad f(x, xi) - grad f(x)||^2 <= sigma^2.
struct ProblemSpec {
  int32_t dim = 1;
  double smoothness = 0.0;         // L
  double strong_convexity = 0.0;   // mu; 0 means merely convex
  double grad_variance = 0.0;      // sigma (not squared)
  double holder_exponent = 1.0;    // nu in [0, 1]
  double holder_constant = 0.0;    // M_nu
  ConvexityClass convexity = ConvexityClass::kConvexSmooth;

  // Throws InputError when an invariant is violated.
  void Validate() const;
};

// Which way the logistic loss is written. kAsWritten is
// log(1 + exp(1 + y<x, xi>)), reproduced verbatim from the benchmark
// protocol this library follows; kConventional is log(1 + exp(-y<x, xi>)).
enum class LogisticForm { kAsWritten, kConventional };

// Per-sample loss family.
class LossKind {
 public:
  enum class Kind { kRidge, kLogistic, kQuadratic1d, kCustom };

  using LossFn = std::function<double(const Vector&, const SparseExample&)>;
  using GradFn = std::function<Vector(const Vector&, const SparseExample&)>;

  // (<x, xi> - y)^2.
  static LossKind Ridge();
  static LossKind Logistic(LogisticForm form = LogisticForm::kAsWritten);
  // a * ||x||^2 / 2, independent of the example. Minimum 0 at the origin.
  static LossKind Quadratic1d(double curvature);
  static LossKind Custom(std::string name, LossFn loss, GradFn grad);

  Kind kind() const { return kind_; }
  LogisticForm logistic_form() const { return form_; }
  double curvature() const { return curvature_; }
  std::string name() const;

  const LossFn& custom_loss() const { return loss_; }
  const GradFn& custom_grad() const { return grad_; }

 private:
  LossKind(Kind kind) : kind_(kind) {}

  Kind kind_;
  LogisticForm form_ = LogisticForm::kAsWritten;
  double curvature_ = 0.0;
  std::string name_;
  LossFn loss_;
  GradFn grad_;
};

double EvalLoss(const LossKind& kind, const Vector& x,
                const SparseExample& example);
Vector EvalGrad(const LossKind& kind, const Vector& x,
                const SparseExample& example);

// out += weight * grad f(x, example), without allocating for the built-in
// kinds. Performs no dimension checks.
void AccumulateGrad(const LossKind& kind, const Vector& x,
                    const SparseExample& example, double weight, Vector& out);

// (1/n) sum_i f(x, xi_i) and its gradient.
double EmpiricalRisk(const LossKind& kind, const Vector& x,
                     const Dataset& data);
Vector EmpiricalGradient(const LossKind& kind, const Vector& x,
                         const Dataset& data);

// Bounds on the Hessian of the empirical risk: for ridge these are the exact
// extreme eigenvalues of (2/n) X^T X; for logistic the upper value is the
// global smoothness bound (1/4n) lambda_max(X^T X) and the lower value is the
// smallest Hessian eigenvalue at `x`.
struct CurvatureBounds {
  double smallest = 0.0;
  double largest = 0.0;
};
CurvatureBounds EstimateCurvature(const LossKind& kind, const Dataset& data,
                                  const Vector& x);

enum class ReferenceSolver { kAuto, kNormalEquations, kGradientDescent };

struct ReferenceMin {
  Vector x_star;
  double f_min = 0.0;
  double grad_norm = 0.0;
  int64_t iterations = 0;
  ReferenceSolver used = ReferenceSolver::kAuto;
};

// High-accuracy minimizer of the empirical risk, used as the baseline for
// excess risk. Ridge solves the normal equations (falling back to gradient
// descent when they are singular); everything else runs deterministic
// full-gradient descent until ||grad|| < 1e-10 or 1e6 iterations. Throws
// ConvergenceError carrying the last gradient norm on failure.
ReferenceMin SolveReferenceMin(const LossKind& kind, const Dataset& data,
                               ReferenceSolver solver = ReferenceSolver::kAuto);

}  // namespace dpclip

#endif  // DPCLIP_PROBLEMS_H_
