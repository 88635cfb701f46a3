// Copyright 2026 The FOGAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fogan/checks/checks.hpp"
#include "fogan/critic_solver.hpp"
#include "fogan/error.hpp"
#include "fogan/eval/config.hpp"
#include "fogan/eval/corpus.hpp"
#include "fogan/eval/experiment.hpp"
#include "fogan/eval/metrics.hpp"

namespace {

using namespace fogan;

int cmd_run(const std::vector<std::string>& configs, std::optional<int> smooth, const std::string& compare) {
  std::vector<std::pair<std::string, eval::ExperimentResult>> runs;
  int worst = 0;
  for (const auto& path : configs) {
    std::cout << "== " << path << '\n';
    eval::ExperimentResult r;
    const int code = eval::run_experiment_file(path, smooth, std::cout, &r);
    worst = std::max(worst, code);
    if (code == 0) runs.emplace_back(std::filesystem::path(path).stem().string(), std::move(r));
  }
  if (!compare.empty() && !runs.empty()) {
    const auto& first = runs.front().second;
    if (first.evals.empty() || first.evals.front().metrics.empty()) {
      std::cerr << "no metrics to compare\n";
      return std::max(worst, 1);
    }
    const std::string metric = first.evals.front().metrics.front().first;
    eval::write_comparison_plot(compare, metric, runs, smooth.value_or(1));
    std::cout << "comparison of " << metric << " written to " << compare << '\n';
  }
  return worst;
}

int cmd_check(bool skip_slow, std::optional<int> only, const std::string& report) {
  if (!report.empty()) std::filesystem::create_directories(report);
  int run = 0;
  int passed = 0;
  for (const auto& entry : checks::all_checks(report)) {
    if (only && entry.id != *only) continue;
    if (!only && skip_slow && entry.slow) {
      std::cout << "[SKIP] " << entry.id << ' ' << entry.name << '\n';
      continue;
    }
    const checks::CheckResult r = entry.run();
    std::cout << checks::format_result(r) << std::endl;
    ++run;
    passed += r.passed ? 1 : 0;
  }
  std::cout << passed << '/' << run << " checks passed\n";
  return passed == run ? 0 : 1;
}

int cmd_solve(const std::string& p_path, const std::string& q_path, double lambda) {
  const EmpiricalMeasure p = eval::read_point_csv(p_path);
  const EmpiricalMeasure q = eval::read_point_csv(q_path);
  const auto [critic, report] = solve_optimal_critic(p, q, lambda);
  std::cout << std::setprecision(12);
  std::cout << "# side,index,value\n";
  for (std::size_t i = 0; i < critic.p_count; ++i) std::cout << "p," << i << ',' << critic.p_value(i) << '\n';
  for (std::size_t j = 0; j < critic.q_count(); ++j) std::cout << "q," << j << ',' << critic.q_value(j) << '\n';
  std::cout << "# iterations " << report.iterations << (report.converged ? " (converged)" : " (not converged)")
            << '\n'
            << "# final_delta " << report.final_delta << '\n'
            << "# slope_residual_p " << report.slope_residual_p << '\n'
            << "# slope_residual_q " << report.slope_residual_q << '\n'
            << "# contraction_rate " << report.contraction_rate << '\n'
            << "# tau_p " << tau_p_value(critic, p, q, lambda) << '\n';
  return report.converged ? 0 : 2;
}

int cmd_jsd(const std::string& a_path, const std::string& b_path, int n) {
  const auto a = eval::read_text_corpus(a_path);
  const auto b = eval::read_text_corpus(b_path);
  const double v = eval::ngram_jsd(eval::NGramDistribution::from_sequences(a, n),
                                   eval::NGramDistribution::from_sequences(b, n));
  std::cout << std::setprecision(12) << v << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized Wasserstein GAN toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train and evaluate one or more experiment configs");
  std::vector<std::string> configs;
  std::optional<int> smooth;
  std::string compare;
  run->add_option("configs", configs, "config files")->required()->check(CLI::ExistingFile);
  run->add_option("--smooth", smooth, "moving-average window for plotted metrics")->check(CLI::PositiveNumber);
  run->add_option("--compare", compare, "write an SVG comparing the first metric across runs");

  auto* check = app.add_subcommand("check", "run the oracle and invariant suite");
  bool skip_slow = false;
  std::optional<int> only;
  std::string report;
  check->add_flag("--skip-slow", skip_slow, "skip the network training checks");
  check->add_option("--only", only, "run a single check by id");
  check->add_option("--report", report, "directory for plots produced by the checks");

  auto* solve = app.add_subcommand("solve", "fixed-point optimal critic between two point sets");
  std::string p_path;
  std::string q_path;
  double lambda = 1.0;
  solve->add_option("--p", p_path, "CSV of points of P")->required()->check(CLI::ExistingFile);
  solve->add_option("--q", q_path, "CSV of points of Q")->required()->check(CLI::ExistingFile);
  solve->add_option("--lambda", lambda, "penalty weight")->required()->check(CLI::PositiveNumber);

  auto* jsd = app.add_subcommand("jsd", "n-gram Jensen-Shannon divergence between two corpora");
  std::string a_path;
  std::string b_path;
  int n = 3;
  jsd->add_option("--a", a_path, "first corpus, one sequence per line")->required()->check(CLI::ExistingFile);
  jsd->add_option("--b", b_path, "second corpus")->required()->check(CLI::ExistingFile);
  jsd->add_option("--n", n, "n-gram order")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(configs, smooth, compare);
    if (check->parsed()) return cmd_check(skip_slow, only, report);
    if (solve->parsed()) return cmd_solve(p_path, q_path, lambda);
    if (jsd->parsed()) return cmd_jsd(a_path, b_path, n);
  } catch (const fogan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
