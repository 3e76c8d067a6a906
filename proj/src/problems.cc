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
#include "dpclip/problems.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <utility>

namespace dpclip {
namespace {

constexpr double kReferenceTolerance = 1e-10;
constexpr int64_t kReferenceMaxIterations = 1'000'000;

void CheckDims(const Vector& x, const SparseExample& example) {
  if (example.RequiredDim() > x.size()) {
    throw InputError("example index " + std::to_string(example.RequiredDim() - 1) +
                     " out of range for dimension " + std::to_string(x.size()));
  }
}

// log(1 + exp(t)) without overflow.
double Softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double Sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Argument of the softplus and its derivative w.r.t. <x, xi>.
std::pair<double, double> LogisticArgument(LogisticForm form, double y,
                                           double margin) {
  if (form == LogisticForm::kAsWritten) return {1.0 + y * margin, y};
  return {-y * margin, -y};
}

}  // namespace

void ProblemSpec::Validate() const {
  if (dim < 1) throw InputError("ProblemSpec: dim must be positive");
  if (!(smoothness >= 0) || !(strong_convexity >= 0) || !(grad_variance >= 0) ||
      !(holder_constant >= 0)) {
    throw InputError("ProblemSpec: constants must be nonnegative");
  }
  if (smoothness > 0 && strong_convexity > smoothness) {
    throw InputError("ProblemSpec: strong convexity exceeds smoothness");
  }
  if (!(holder_exponent >= 0.0 && holder_exponent <= 1.0)) {
    throw InputError("ProblemSpec: holder exponent must lie in [0, 1]");
  }
  if (convexity == ConvexityClass::kStronglyConvex && !(strong_convexity > 0)) {
    throw InputError("ProblemSpec: strongly convex class needs mu > 0");
  }
}

LossKind LossKind::Ridge() { return LossKind(Kind::kRidge); }

LossKind LossKind::Logistic(LogisticForm form) {
  LossKind k(Kind::kLogistic);
  k.form_ = form;
  return k;
}

LossKind LossKind::Quadratic1d(double curvature) {
  if (!(curvature > 0)) throw InputError("quadratic curvature must be positive");
  LossKind k(Kind::kQuadratic1d);
  k.curvature_ = curvature;
  return k;
}

LossKind LossKind::Custom(std::string name, LossFn loss, GradFn grad) {
  if (!loss || !grad) throw InputError("custom loss needs both callbacks");
  LossKind k(Kind::kCustom);
  k.name_ = std::move(name);
  k.loss_ = std::move(loss);
  k.grad_ = std::move(grad);
  return k;
}

std::string LossKind::name() const {
  switch (kind_) {
    case Kind::kRidge:
      return "ridge";
    case Kind::kLogistic:
      return form_ == LogisticForm::kAsWritten ? "logistic"
                                               : "logistic_conventional";
    case Kind::kQuadratic1d:
      return "quadratic1d";
    case Kind::kCustom:
      return name_.empty() ? "custom" : name_;
  }
  return "unknown";
}

double EvalLoss(const LossKind& kind, const Vector& x,
                const SparseExample& example) {
  CheckDims(x, example);
  switch (kind.kind()) {
    case LossKind::Kind::kRidge: {
      const double r = example.Dot(x) - example.label;
      return r * r;
    }
    case LossKind::Kind::kLogistic: {
      const auto [t, unused] = LogisticArgument(kind.logistic_form(),
                                                example.label, example.Dot(x));
      return Softplus(t);
    }
    case LossKind::Kind::kQuadratic1d:
      return 0.5 * kind.curvature() * x.squaredNorm();
    case LossKind::Kind::kCustom:
      return kind.custom_loss()(x, example);
  }
  return 0.0;
}

void AccumulateGrad(const LossKind& kind, const Vector& x,
                    const SparseExample& example, double weight, Vector& out) {
  switch (kind.kind()) {
    case LossKind::Kind::kRidge:
      example.AddTo(weight * 2.0 * (example.Dot(x) - example.label), out);
      return;
    case LossKind::Kind::kLogistic: {
      const auto [t, dt] = LogisticArgument(kind.logistic_form(), example.label,
                                            example.Dot(x));
      example.AddTo(weight * dt * Sigmoid(t), out);
      return;
    }
    case LossKind::Kind::kQuadratic1d:
      out.noalias() += (weight * kind.curvature()) * x;
      return;
    case LossKind::Kind::kCustom:
      out.noalias() += weight * kind.custom_grad()(x, example);
      return;
  }
}

Vector EvalGrad(const LossKind& kind, const Vector& x,
                const SparseExample& example) {
  CheckDims(x, example);
  Vector g = Vector::Zero(x.size());
  AccumulateGrad(kind, x, example, 1.0, g);
  if (g.size() != x.size()) throw InputError("custom gradient has wrong size");
  return g;
}

double EmpiricalRisk(const LossKind& kind, const Vector& x,
                     const Dataset& data) {
  if (data.empty()) throw InputError("empirical risk of an empty dataset");
  if (data.dim > x.size()) throw InputError("dataset dimension exceeds x");
  double s = 0.0;
  for (const auto& ex : data.examples) s += EvalLoss(kind, x, ex);
  return s / static_cast<double>(data.size());
}

Vector EmpiricalGradient(const LossKind& kind, const Vector& x,
                         const Dataset& data) {
  if (data.empty()) throw InputError("empirical gradient of an empty dataset");
  if (data.dim > x.size()) throw InputError("dataset dimension exceeds x");
  Vector g = Vector::Zero(x.size());
  const double w = 1.0 / static_cast<double>(data.size());
  for (const auto& ex : data.examples) AccumulateGrad(kind, x, ex, w, g);
  return g;
}

namespace {

// (1/n) X^T diag(weights) X, accumulated from the sparse rows.
Matrix WeightedGram(const Dataset& data, int32_t dim,
                    const std::function<double(const SparseExample&)>& weight) {
  Matrix gram = Matrix::Zero(dim, dim);
  for (const auto& ex : data.examples) {
    const double w = weight(ex);
    if (w == 0.0) continue;
    for (size_t i = 0; i < ex.indices.size(); ++i) {
      for (size_t j = 0; j <= i; ++j) {
        gram(ex.indices[i], ex.indices[j]) += w * ex.values[i] * ex.values[j];
      }
    }
  }
  gram /= static_cast<double>(data.size());
  return gram.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd SymmetricEigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

int32_t WorkingDim(const Dataset& data) { return std::max<int32_t>(data.dim, 1); }

ReferenceMin GradientDescentReference(const LossKind& kind, const Dataset& data,
                                      double smoothness_hint) {
  const int32_t dim = WorkingDim(data);
  Vector x = Vector::Zero(dim);
  double f = EmpiricalRisk(kind, x, data);
  Vector g = EmpiricalGradient(kind, x, data);
  double step = smoothness_hint > 0 ? 1.0 / smoothness_hint : 1.0;

  // Barzilai-Borwein steps safeguarded by a nonmonotone Armijo test over the
  // last few objective values. The relative slack admits steps once the
  // decrease drops below floating-point resolution of f.
  std::deque<double> recent{f};
  constexpr size_t kWindow = 10;
  int64_t it = 0;
  for (; it < kReferenceMaxIterations; ++it) {
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) < kReferenceTolerance) break;
    const double fmax = *std::max_element(recent.begin(), recent.end());
    double t = step;
    Vector xn;
    double fn = 0.0;
    for (int backtracks = 0;; ++backtracks) {
      xn = x - t * g;
      fn = EmpiricalRisk(kind, xn, data);
      if (std::isfinite(fn) &&
          fn <= fmax - 1e-4 * t * gn2 + 1e-15 * std::abs(fmax)) {
        break;
      }
      t *= 0.5;
      if (backtracks > 200) {
        throw ConvergenceError("reference descent: line search failed",
                               std::sqrt(gn2));
      }
    }
    Vector gn = EmpiricalGradient(kind, xn, data);
    const Vector s = xn - x;
    const Vector y = gn - g;
    const double sy = s.dot(y);
    step = sy > 0 ? s.squaredNorm() / sy : 2.0 * t;
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    recent.push_back(f);
    if (recent.size() > kWindow) recent.pop_front();
  }
  const double grad_norm = g.norm();
  if (!(grad_norm < kReferenceTolerance)) {
    throw ConvergenceError("reference descent did not converge in " +
                               std::to_string(it) + " iterations",
                           grad_norm);
  }
  return ReferenceMin{.x_star = std::move(x),
                      .f_min = f,
                      .grad_norm = grad_norm,
                      .iterations = it,
                      .used = ReferenceSolver::kGradientDescent};
}

}  // namespace

CurvatureBounds EstimateCurvature(const LossKind& kind, const Dataset& data,
                                  const Vector& x) {
  if (data.empty()) throw InputError("curvature of an empty dataset");
  const int32_t dim = WorkingDim(data);
  switch (kind.kind()) {
    case LossKind::Kind::kRidge: {
      const Vector ev = SymmetricEigenvalues(
          WeightedGram(data, dim, [](const SparseExample&) { return 2.0; }));
      return {std::max(ev.minCoeff(), 0.0), ev.maxCoeff()};
    }
    case LossKind::Kind::kLogistic: {
      if (x.size() != dim) throw InputError("curvature point has wrong size");
      const Vector upper = SymmetricEigenvalues(WeightedGram(
          data, dim,
          [](const SparseExample& ex) { return 0.25 * ex.label * ex.label; }));
      const LogisticForm form = kind.logistic_form();
      const Vector local = SymmetricEigenvalues(
          WeightedGram(data, dim, [&](const SparseExample& ex) {
            const auto [t, dt] = LogisticArgument(form, ex.label, ex.Dot(x));
            const double s = Sigmoid(t);
            return s * (1.0 - s) * dt * dt;
          }));
      return {std::max(local.minCoeff(), 0.0), upper.maxCoeff()};
    }
    case LossKind::Kind::kQuadratic1d:
      return {kind.curvature(), kind.curvature()};
    case LossKind::Kind::kCustom:
      break;
  }
  throw InputError("curvature estimate not available for custom losses");
}

ReferenceMin SolveReferenceMin(const LossKind& kind, const Dataset& data,
                               ReferenceSolver solver) {
  if (data.empty()) throw InputError("reference minimum of an empty dataset");
  const int32_t dim = WorkingDim(data);

  if (kind.kind() == LossKind::Kind::kQuadratic1d) {
    return ReferenceMin{.x_star = Vector::Zero(dim),
                        .f_min = 0.0,
                        .grad_norm = 0.0,
                        .iterations = 0,
                        .used = ReferenceSolver::kNormalEquations};
  }

  if (kind.kind() == LossKind::Kind::kRidge &&
      solver != ReferenceSolver::kGradientDescent) {
    const Matrix h =
        WeightedGram(data, dim, [](const SparseExample&) { return 2.0; });
    Vector b = Vector::Zero(dim);
    for (const auto& ex : data.examples) ex.AddTo(2.0 * ex.label, b);
    b /= static_cast<double>(data.size());
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      Vector x = llt.solve(b);
      // One step of iterative refinement against the assembled system.
      x += llt.solve(b - h * x);
      const Vector g = EmpiricalGradient(kind, x, data);
      return ReferenceMin{.x_star = x,
                          .f_min = EmpiricalRisk(kind, x, data),
                          .grad_norm = g.norm(),
                          .iterations = 0,
                          .used = ReferenceSolver::kNormalEquations};
    }
    if (solver == ReferenceSolver::kNormalEquations) {
      throw InputError("ridge normal equations are singular");
    }
  }

  double hint = 0.0;
  if (kind.kind() != LossKind::Kind::kCustom) {
    hint = EstimateCurvature(kind, data, Vector::Zero(dim)).largest;
  }
  return GradientDescentReference(kind, data, hint);
}

}  // namespace dpclip
