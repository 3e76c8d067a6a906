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
// Python bindings for the clipped-dpSGD core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "dpclip/bench.h"
#include "dpclip/clipping.h"
#include "dpclip/common.h"
#include "dpclip/data.h"
#include "dpclip/optimizer.h"
#include "dpclip/privacy.h"
#include "dpclip/problems.h"
#include "dpclip/restart.h"

namespace py = pybind11;

namespace dpclip {
namespace {

py::dict ScheduleDict(const Schedule& s) {
  py::dict d;
  d["level"] = s.level;
  d["batch"] = s.batch;
  d["stepsize"] = s.stepsize;
  d["iterations"] = s.iterations;
  d["noise_std"] = s.noise_std;
  d["noise_radius"] = s.noise_radius;
  d["source"] = std::string(ScheduleSourceName(s.source));
  return d;
}

Schedule ScheduleFromArgs(double level, int64_t batch, double stepsize,
                          int64_t iterations, double noise_std) {
  Schedule s;
  s.level = level;
  s.batch = batch;
  s.stepsize = stepsize;
  s.iterations = iterations;
  s.noise_std = noise_std;
  s.source = ScheduleSource::kManual;
  return s;
}

}  // namespace
}  // namespace dpclip

PYBIND11_MODULE(_dpclip, m) {
  using namespace dpclip;
  m.doc() = "Differentially private clipped SGD for heavy-tailed data";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);
  py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);

  m.def("clip", &Clip, py::arg("g"), py::arg("level"),
        "Rescale g onto the ball of radius level when its norm exceeds it.");
  m.def("deviation_bound", &DeviationBound, py::arg("k"), py::arg("level"),
        py::arg("beta"), py::arg("iterations"), py::arg("noise_std"), py::arg("dim"));

  m.def(
      "calibrate_sigma",
      [](double level, int64_t batch, int64_t iterations, int64_t n, double epsilon,
         double delta, double c) {
        return CalibrateSigma(level, batch, iterations, n,
                              {.epsilon = epsilon, .delta = delta, .abadi_c = c});
      },
      py::arg("level"), py::arg("batch"), py::arg("iterations"), py::arg("n"),
      py::arg("epsilon"), py::arg("delta"), py::arg("c") = 1.0);
  m.def(
      "calibrate_sigma_strong",
      [](double level, int64_t batch, int64_t iterations, double epsilon, double delta) {
        return CalibrateSigmaStrong(
            level, batch, iterations,
            {.epsilon = epsilon, .delta = delta, .mode = AccountantMode::kStrongComposition});
      },
      py::arg("level"), py::arg("batch"), py::arg("iterations"), py::arg("epsilon"),
      py::arg("delta"));
  m.def(
      "split_budget",
      [](double epsilon, double delta, int stages) {
        const StageBudget b = SplitBudget(epsilon, delta, stages);
        return py::make_tuple(b.epsilon, b.delta);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("stages"));
  m.def(
      "recombine_stages",
      [](double eps_hat, double delta_hat, int stages) {
        const EpsilonDelta e = RecombineStages({eps_hat, delta_hat, stages});
        return py::make_tuple(e.epsilon, e.delta);
      },
      py::arg("eps_hat"), py::arg("delta_hat"), py::arg("stages"));

  m.def(
      "schedule_bounded",
      [](double L, double radius, double beta, int64_t iterations, double sigma) {
        return ScheduleDict(ScheduleBoundedDomain(L, radius, beta, iterations, sigma));
      },
      py::arg("smoothness"), py::arg("radius"), py::arg("beta"), py::arg("iterations"),
      py::arg("sigma"));
  m.def(
      "schedule_unbounded",
      [](double L, double radius, double beta, int64_t iterations, double sigma,
         int64_t dim, int64_t n, double epsilon, double delta) {
        return ScheduleDict(ScheduleUnbounded({L, radius, beta, iterations, sigma, dim, n,
                                               epsilon, delta}));
      },
      py::arg("smoothness"), py::arg("radius"), py::arg("beta"), py::arg("iterations"),
      py::arg("sigma"), py::arg("dim"), py::arg("n"), py::arg("epsilon"),
      py::arg("delta"));
  m.def("min_inner_iterations", &MinInnerIterations, py::arg("smoothness"),
        py::arg("strong_convexity"), py::arg("beta"));
  m.def("default_stage_count", &DefaultStageCount, py::arg("smoothness"),
        py::arg("strong_convexity"), py::arg("n"));
  m.def("suggest_iterations", &SuggestIterations, py::arg("radius"), py::arg("n"),
        py::arg("epsilon"), py::arg("dim"), py::arg("delta"));

  m.def(
      "parse_libsvm",
      [](const std::string& text) {
        const Dataset data = ParseLibsvm(std::string_view(text));
        py::list rows;
        for (const SparseExample& ex : data.examples) {
          rows.append(py::make_tuple(ex.label, ex.indices, ex.values));
        }
        return py::make_tuple(rows, data.dim);
      },
      py::arg("text"), "Returns ([(label, indices, values)], dim); indices are 0-based.");

  m.def(
      "run_quadratic",
      [](const Vector& curvatures, const Vector& center, const Vector& x0, double level,
         int64_t batch, double stepsize, int64_t iterations, double noise_std,
         double grad_noise, uint64_t seed, bool keep_iterates) {
        QuadraticOracle oracle({.curvatures = curvatures,
                                .center = center,
                                .noise_std = grad_noise,
                                .seed = seed});
        const Schedule s = ScheduleFromArgs(level, batch, stepsize, iterations, noise_std);
        const PrivacyBudget budget{.mode = AccountantMode::kNone};
        const RunRecord rec = RunClippedDpsgd(oracle, x0, s, ProjectionSpec{}, budget,
                                              {.noise_seed = seed,
                                               .keep_iterates = keep_iterates});
        py::dict out;
        out["average"] = rec.average;
        out["last"] = rec.last;
        out["clipped_fraction"] = rec.ClippedFraction();
        if (rec.iterates) out["iterates"] = *rec.iterates;
        return out;
      },
      py::arg("curvatures"), py::arg("center"), py::arg("x0"), py::arg("level"),
      py::arg("batch"), py::arg("stepsize"), py::arg("iterations"),
      py::arg("noise_std") = 0.0, py::arg("grad_noise") = 0.0, py::arg("seed") = 0,
      py::arg("keep_iterates") = false,
      "Noise-free-accounting clipped SGD on f(x) = 0.5 (x - c)' diag(h) (x - c).");

  m.def(
      "run_synthetic",
      [](const std::string& method, const std::vector<double>& epsilons, int runs,
         int64_t rows, int32_t dim, int64_t epochs, int64_t batch, uint64_t seed,
         const std::string& regime_policy, const std::string& accountant) {
        ExperimentConfig cfg;
        cfg.method = ParseMethod(method);
        cfg.epsilons = epsilons;
        cfg.runs = runs;
        cfg.synthetic_rows = rows;
        cfg.synthetic.dim = dim;
        cfg.epochs = epochs;
        cfg.batch = batch;
        cfg.seed = seed;
        cfg.regime_policy = ParseRegimePolicy(regime_policy);
        cfg.accountant = ParseAccountantMode(accountant);
        const ExperimentResult result = RunExperiment(cfg);
        py::list out;
        for (const ResultRow& r : result.rows) {
          py::dict d;
          d["method"] = r.method;
          d["eps"] = r.epsilon;
          d["seed"] = r.seed;
          d["epoch"] = r.epoch;
          d["excess_risk"] = r.excess_risk;
          d["wallclock_s"] = r.wallclock_s;
          d["clipped_frac"] = r.clipped_frac;
          out.append(d);
        }
        return out;
      },
      py::arg("method") = "t2", py::arg("epsilons") = std::vector<double>{1.0},
      py::arg("runs") = 1, py::arg("rows") = 10000, py::arg("dim") = 10,
      py::arg("epochs") = 30, py::arg("batch") = 200, py::arg("seed") = 0,
      py::arg("regime_policy") = "reject", py::arg("accountant") = "abadi",
      "Synthetic heavy-tailed ridge sweep; returns every epoch row.");
}
