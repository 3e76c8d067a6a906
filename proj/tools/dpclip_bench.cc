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
// Command-line driver for clipped-dpSGD experiment sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "dpclip/bench.h"
#include "dpclip/common.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

void FinalRowsOnly(std::vector<dpclip::ResultRow>& rows) {
  std::vector<dpclip::ResultRow> kept;
  for (size_t i = 0; i < rows.size(); ++i) {
    const bool last = i + 1 == rows.size() || rows[i + 1].seed != rows[i].seed ||
                      rows[i + 1].epsilon != rows[i].epsilon;
    if (last) kept.push_back(rows[i]);
  }
  rows.swap(kept);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private clipped SGD experiments"};
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");

  dpclip::ExperimentConfig cfg;
  std::string task = "synthetic";
  std::string method = "t2";
  std::string accountant = "abadi";
  std::string regime = "reject";
  std::string stepsize_rule = "schedule";
  std::string lambda_preset = "none";
  std::string distribution = "pareto";
  std::string sampling = "auto";
  std::string logistic_form = "as_written";
  std::string out_path;
  std::string summary_path;
  std::vector<double> eps;
  double lambda_override = 0.0;
  double stepsize_override = 0.0;
  bool suggest = false;

  app.add_option("--task", task, "ridge | logistic | synthetic")
      ->check(CLI::IsMember({"ridge", "logistic", "synthetic"}));
  app.add_option("--method", method, "t2 | t3 | restarted | csgd_nonprivate")
      ->check(CLI::IsMember({"t2", "t3", "restarted", "csgd_nonprivate"}));
  app.add_option("--data", cfg.data_path, "LIBSVM file for ridge / logistic");
  app.add_option("--train-rows", cfg.train_rows, "Leading rows used for training (0 = all)");
  app.add_option("--logistic-form", logistic_form, "as_written | conventional")
      ->check(CLI::IsMember({"as_written", "conventional"}));
  app.add_option("--eps", eps, "Comma-separated privacy budgets")->delimiter(',');
  app.add_option("--delta", cfg.delta, "Privacy slack (default 1/n)");
  app.add_option("--beta", cfg.beta, "Failure probability");
  app.add_option("--epochs", cfg.epochs, "Epochs; N = epochs * ceil(n / m)");
  app.add_option("--iterations", cfg.iterations, "Explicit N (overrides --epochs)");
  app.add_option("--batch", cfg.batch, "Batch size m (0 = schedule formula)");
  app.add_option("--runs", cfg.runs, "Seeds per eps");
  app.add_option("--seed", cfg.seed, "First seed");
  app.add_option("--lambda-override", lambda_override, "Fixed clipping level");
  app.add_option("--lambda-preset", lambda_preset, "none | adult")
      ->check(CLI::IsMember({"none", "adult"}));
  app.add_option("--stepsize-rule", stepsize_rule, "schedule | conservative")
      ->check(CLI::IsMember({"schedule", "conservative"}));
  app.add_option("--stepsize-override", stepsize_override, "Fixed stepsize");
  app.add_option("--accountant", accountant, "abadi | strong | none")
      ->check(CLI::IsMember({"abadi", "strong", "none"}));
  app.add_option("--abadi-c", cfg.abadi_c, "Constant in the abadi noise formula");
  app.add_option("--regime-c1", cfg.regime_c1, "Constant in eps <= c1 N m^2 / n^2");
  app.add_option("--regime-policy", regime, "reject | fallback_strong | warn")
      ->check(CLI::IsMember({"reject", "fallback_strong", "warn"}));
  app.add_option("--sampling", sampling,
                 "auto | replacement | poisson (auto: poisson when private)")
      ->check(CLI::IsMember({"auto", "replacement", "poisson"}));
  app.add_option("--smoothness", cfg.smoothness, "L (default: from data)");
  app.add_option("--strong-convexity", cfg.strong_convexity, "mu (default: from data)");
  app.add_option("--radius", cfg.radius, "R0 (default: distance to the reference minimizer)");
  app.add_option("--sigma", cfg.grad_std, "Gradient noise level sigma");
  app.add_option("--stages", cfg.stages, "Restart stages (0 = ceil((L/mu) log2 n))");
  app.add_option("--inner-iterations", cfg.inner_iterations, "Restart N0 (0 = smallest valid)");
  app.add_option("--rows", cfg.synthetic_rows, "Synthetic rows n");
  app.add_option("--dim", cfg.synthetic.dim, "Synthetic dimension d");
  app.add_option("--tail", distribution, "pareto | student_t | lognormal")
      ->check(CLI::IsMember({"pareto", "student_t", "lognormal"}));
  app.add_option("--tail-shape", cfg.synthetic.shape, "Tail index / dof / log-scale");
  app.add_option("--noise-scale", cfg.synthetic.noise_scale, "Synthetic label noise scale");
  app.add_option("--data-seed", cfg.synthetic.seed, "Synthetic data seed");
  app.add_flag("--allow-infinite-variance", cfg.synthetic.allow_infinite_variance,
               "Admit tail shapes with infinite variance");
  app.add_flag("--synthetic-logistic", cfg.synthetic_logistic,
               "Sign labels and logistic loss for the synthetic task");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", out_path, "CSV of result rows");
  app.add_option("--summary-out", summary_path, "CSV of the per-eps summary");
  app.add_flag("--emit-trajectory", cfg.emit_trajectory, "Write every epoch, not only the last");
  app.add_flag("--report-best", cfg.report_best, "Summarize each run by its best epoch");
  app.add_flag("--suggest-iterations", suggest, "Print the advisory N and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cfg.task = dpclip::ParseTask(task);
    cfg.method = dpclip::ParseMethod(method);
    cfg.accountant = dpclip::ParseAccountantMode(accountant);
    cfg.regime_policy = dpclip::ParseRegimePolicy(regime);
    cfg.stepsize_rule = dpclip::ParseStepsizeRule(stepsize_rule);
    cfg.lambda_preset = dpclip::ParseLambdaPreset(lambda_preset);
    if (sampling == "poisson") cfg.sampling = dpclip::SamplingMode::kPoisson;
    if (sampling == "replacement") cfg.sampling = dpclip::SamplingMode::kWithReplacement;
    cfg.logistic_form = logistic_form == "conventional" ? dpclip::LogisticForm::kConventional
                                                        : dpclip::LogisticForm::kAsWritten;
    static const std::map<std::string, dpclip::HeavyTailDistribution> kLaws = {
        {"pareto", dpclip::HeavyTailDistribution::kPareto},
        {"student_t", dpclip::HeavyTailDistribution::kStudentT},
        {"lognormal", dpclip::HeavyTailDistribution::kLogNormal}};
    cfg.synthetic.distribution = kLaws.at(distribution);
    if (!eps.empty()) cfg.epsilons = eps;
    if (app.count("--lambda-override") > 0) cfg.lambda_override = lambda_override;
    if (app.count("--stepsize-override") > 0) cfg.stepsize_override = stepsize_override;

    dpclip::ExperimentResult result = dpclip::RunExperiment(cfg);
    const dpclip::ExperimentSetup& s = result.setup;
    std::cerr << "n = " << s.n << ", d = " << s.dim << ", L = " << s.smoothness
              << ", mu = " << s.strong_convexity << ", R0 = " << s.radius
              << ", delta = " << s.delta << ", N = " << s.iterations << "\n";
    if (suggest) {
      for (double e : cfg.epsilons) {
        std::cout << "eps " << e << ": suggested N = "
                  << dpclip::SuggestIterations(s.radius, s.n, e, s.dim, s.delta) << "\n";
      }
    }
    bool warned = false;
    for (const auto& r : result.rows) warned = warned || r.regime_warning;
    if (warned) {
      std::cerr << "warning: eps exceeds c1 N m^2 / n^2; the abadi noise level is "
                   "outside its stated regime\n";
    }
    if (cfg.method == dpclip::Method::kRestarted) {
      std::cerr << "epoch column holds the restart stage; confidence 1 - tau * beta\n";
    }

    const auto summary = dpclip::Summarize(result.rows, cfg.report_best);
    if (!cfg.emit_trajectory) FinalRowsOnly(result.rows);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      dpclip::WriteRowsCsv(result.rows, out);
    }
    if (!summary_path.empty()) {
      std::ofstream out(summary_path);
      if (!out) throw std::runtime_error("cannot open " + summary_path);
      dpclip::WriteSummaryCsv(summary, out);
    }
    dpclip::WriteSummaryText(summary, std::cout);
  } catch (const dpclip::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dpclip::InputError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dpclip::RunError& e) {
    std::cerr << "run diverged at iteration " << e.iteration() << " (stage " << e.stage()
              << "): " << e.what() << "\n";
    return kExitDivergence;
  } catch (const dpclip::ConvergenceError& e) {
    std::cerr << "reference solver failed: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
