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

#include "fogan/eval/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "fogan/error.hpp"
#include "fogan/eval/corpus.hpp"
#include "fogan/eval/plot.hpp"

namespace fogan::eval {

namespace {

// Stream ids for task-level randomness; training uses its own streams.
constexpr std::uint64_t kGeneratorInitStream = 100;
constexpr std::uint64_t kCriticInitStream = 101;
constexpr std::uint64_t kEvalStream = 102;
constexpr std::uint64_t kToyCorpusSeed = kToyChainSeed + 1;
constexpr std::uint64_t kBayesSeed = kToyChainSeed + 2;

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Mlp make_critic(const ExperimentConfig& c, int input_dim) {
  return Mlp::init(with_ends(input_dim, c.critic_hidden, 1), c.activation, InitScheme::UniformScaled,
                   derive_seed(c.train.seed, kCriticInitStream));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TargetSampler ring_sampler(int modes, double radius, double sigma) {
  const std::vector<Point> centers = ring_centers(modes, radius);
  return [centers, sigma](Rng& rng) {
    const Point& c = centers[rng.index(centers.size())];
    return Point{c[0] + sigma * rng.normal(), c[1] + sigma * rng.normal()};
  };
}

TaskSetup make_task(const ExperimentConfig& c) {
  c.validate();
  TaskSetup t;
  const auto eval_n = static_cast<std::size_t>(c.eval_samples);
  const std::uint64_t eval_seed = derive_seed(c.train.seed, kEvalStream);
  switch (c.task) {
    case Task::Dirac1d: {
      t.generator = GeneratorFamily::dirac({c.init_theta});
      t.critic = make_critic(c, 1);
      t.target = [](Rng&) { return Point{0.0}; };
      t.evaluate = [](const GeneratorFamily& g) {
        const double th = g.theta()[0];
        return std::vector<std::pair<std::string, double>>{{"theta", th}, {"abs_theta", std::abs(th)}};
      };
      break;
    }
    case Task::Uniform1d: {
      t.generator = GeneratorFamily::uniform_interval(c.init_theta);
      t.critic = make_critic(c, 1);
      t.target = [](Rng& rng) { return Point{rng.uniform()}; };
      // W1(U[0,theta], U[0,1]) = |theta - 1| / 2.
      t.evaluate = [](const GeneratorFamily& g) {
        const double th = g.theta()[0];
        return std::vector<std::pair<std::string, double>>{{"theta", th}, {"w1", 0.5 * std::abs(th - 1.0)}};
      };
      break;
    }
    case Task::Ring2d: {
      Mlp net = Mlp::init(with_ends(c.latent_dim, c.generator_hidden, 2), c.activation,
                          InitScheme::UniformScaled, derive_seed(c.train.seed, kGeneratorInitStream));
      t.generator = GeneratorFamily::network(std::move(net), LatentSpec{LatentKind::SymmetricCube, c.latent_dim});
      t.critic = make_critic(c, 2);
      t.target = ring_sampler(c.ring_modes, c.ring_radius, c.ring_sigma);
      const auto centers = ring_centers(c.ring_modes, c.ring_radius);
      const double radius = 3.0 * c.ring_sigma;
      t.evaluate = [centers, radius, eval_n, eval_seed](const GeneratorFamily& g) {
        const EmpiricalMeasure s = sample(g, eval_n, eval_seed);
        const int cov = mode_coverage(s, centers, radius, 0.02);
        return std::vector<std::pair<std::string, double>>{{"mode_coverage", static_cast<double>(cov)}};
      };
      break;
    }
    case Task::ToyText: {
      const int width = kToyLength * kToyAlphabet;
      Mlp net = Mlp::init(with_ends(c.latent_dim, c.generator_hidden, width), c.activation,
                          InitScheme::UniformScaled, derive_seed(c.train.seed, kGeneratorInitStream));
      t.generator = GeneratorFamily::network(std::move(net), LatentSpec{LatentKind::SymmetricCube, c.latent_dim},
                                             NetworkHead::RowSoftmax, kToyAlphabet);
      t.critic = make_critic(c, width);
      auto corpus = std::make_shared<std::vector<Sequence>>(
          toy_corpus(static_cast<std::size_t>(c.corpus_size), kToyCorpusSeed));
      t.target = [corpus](Rng& rng) { return one_hot((*corpus)[rng.index(corpus->size())], kToyAlphabet); };
      t.bayes = bayes_limit(*corpus, c.ngram_n, eval_n, c.bayes_repeats, kBayesSeed);
      // Fixed real reference: the first eval_samples corpus lines.
      auto reference = std::make_shared<NGramDistribution>(NGramDistribution::from_sequences(
          std::span<const Sequence>(corpus->data(), eval_n), c.ngram_n));
      const int n = c.ngram_n;
      t.evaluate = [reference, n, eval_n, eval_seed](const GeneratorFamily& g) {
        const EmpiricalMeasure s = sample(g, eval_n, eval_seed);
        NGramDistribution model(n);
        for (const Point& x : s.points()) model.add(decode_rows(x, kToyAlphabet));
        return std::vector<std::pair<std::string, double>>{{"jsd", ngram_jsd(model, *reference)}};
      };
      break;
    }
  }
  return t;
}

std::vector<double> ExperimentResult::metric(const std::string& name) const {
  std::vector<double> out;
  for (const auto& e : evals) {
    for (const auto& [k, v] : e.metrics) {
      if (k == name) out.push_back(v);
    }
  }
  return out;
}

std::vector<double> ExperimentResult::eval_iters() const {
  std::vector<double> out;
  for (const auto& e : evals) out.push_back(e.iter);
  return out;
}

namespace {

void write_outputs(const ExperimentConfig& c, const TaskSetup& task, const ExperimentResult& r,
                   const GeneratorFamily& generator, const Mlp& critic) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + c.output_dir + "': " + ec.message());

  std::ostringstream trace;
  trace << "iter,divergence_estimate,objective_part,penalty_lambda,penalty_mu,penalty_gp,grad_norm\n";
  for (const auto& row : r.trace.rows) {
    const auto& e = row.critic_estimate;
    trace << row.iter << ',' << fmt(e.value) << ',' << fmt(e.objective_part) << ','
          << fmt(e.penalty_lambda) << ',' << fmt(e.penalty_mu) << ',' << fmt(e.penalty_gp) << ','
          << fmt(row.grad_norm) << '\n';
  }
  write_text_file((dir / "trace.csv").string(), trace.str());

  std::vector<std::string> names;
  if (!r.evals.empty()) {
    for (const auto& [k, v] : r.evals.front().metrics) names.push_back(k);
  }
  std::vector<std::vector<double>> smoothed;
  for (const auto& n : names) smoothed.push_back(moving_average(r.metric(n), c.smooth));
  std::ostringstream metrics;
  metrics << "iter";
  for (const auto& n : names) {
    metrics << ',' << n;
    if (c.smooth > 1) metrics << ',' << n << "_smooth" << c.smooth;
  }
  metrics << '\n';
  for (std::size_t k = 0; k < r.evals.size(); ++k) {
    metrics << r.evals[k].iter;
    for (std::size_t m = 0; m < names.size(); ++m) {
      metrics << ',' << fmt(r.evals[k].metrics[m].second);
      if (c.smooth > 1) metrics << ',' << fmt(smoothed[m][k]);
    }
    metrics << '\n';
  }
  write_text_file((dir / "metrics.csv").string(), metrics.str());

  critic.save_checkpoint((dir / "critic.ckpt").string());
  if (generator.kind() == GeneratorKind::NetworkPushforward) {
    Mlp g = generator.net();
    g.set_params(generator.theta());
    g.save_checkpoint((dir / "generator.ckpt").string());
  } else {
    nlohmann::json j;
    j["kind"] = generator.kind() == GeneratorKind::DiracLocation ? "dirac" : "uniform_interval";
    j["theta"] = generator.theta();
    write_text_file((dir / "generator.json").string(), j.dump(2) + "\n");
  }

  // Plots: divergence per step, then one file per metric.
  std::vector<double> it;
  std::vector<double> div;
  for (const auto& row : r.trace.rows) {
    it.push_back(row.iter + 1);
    div.push_back(row.critic_estimate.value);
  }
  std::vector<Series> dseries{{"estimate", it, div}};
  if (c.smooth > 1) dseries.push_back({"moving average " + std::to_string(c.smooth), it, moving_average(div, c.smooth)});
  write_text_file((dir / "divergence.svg").string(),
                  svg_line_chart(to_string(c.train.divergence.kind) + " critic estimate", "iteration", dseries));
  const auto xs = r.eval_iters();
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<Series> s{{names[m], xs, r.metric(names[m])}};
    if (c.smooth > 1) s.push_back({"moving average " + std::to_string(c.smooth), xs, smoothed[m]});
    if (task.bayes && names[m] == "jsd") {
      s.push_back({"bayes limit", {xs.empty() ? 0.0 : xs.front(), xs.empty() ? 1.0 : xs.back()},
                   {task.bayes->mean, task.bayes->mean}});
    }
    write_text_file((dir / (names[m] + ".svg")).string(), svg_line_chart(names[m], "iteration", s));
  }

  nlohmann::json summary;
  summary["task"] = to_string(c.task);
  summary["rule"] = to_string(c.train.rule);
  summary["divergence"] = to_string(c.train.divergence.kind);
  summary["iterations"] = r.trace.rows.size();
  summary["aborted"] = r.trace.aborted;
  summary["abort_reason"] = r.trace.abort_reason;
  summary["seconds"] = r.seconds;
  if (!r.evals.empty()) {
    for (const auto& [k, v] : r.evals.back().metrics) summary["final"][k] = v;
  }
  if (task.bayes) {
    summary["bayes_limit"] = {{"mean", task.bayes->mean},
                              {"stddev", task.bayes->stddev},
                              {"repeats", task.bayes->repeats}};
    if (!task.bayes->warning.empty()) summary["bayes_limit"]["warning"] = task.bayes->warning;
  }
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  write_text_file((dir / "config.txt").string(), format_config(c));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool write) {
  const auto t0 = std::chrono::steady_clock::now();
  TaskSetup task = make_task(config);
  ExperimentResult result;
  result.bayes = task.bayes;

  TrainCallbacks cb;
  cb.on_step = [&](int iter, const GeneratorFamily& g, const Mlp&, TraceRow& row) {
    const int done = iter + 1;
    if (done % config.eval_every != 0 && done != config.train.total_iters) return;
    EvalPoint p{done, task.evaluate(g)};
    row.metrics = p.metrics;
    result.evals.push_back(std::move(p));
  };
  result.trace = train(config.train, task.target, task.generator, task.critic, cb);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (result.trace.aborted) {
    result.exit_code = 2;
    result.message = "training aborted after " + std::to_string(result.trace.rows.size()) +
                     " iterations: " + result.trace.abort_reason;
  }
  if (write) write_outputs(config, task, result, task.generator, task.critic);
  return result;
}

int run_experiment_file(const std::string& path, std::optional<int> smooth, std::ostream& log,
                        ExperimentResult* out) {
  ExperimentConfig c;
  try {
    c = load_config(path);
    if (smooth) {
      c.smooth = *smooth;
      c.validate();
    }
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return 1;
  }
  try {
    const ExperimentResult r = run_experiment(c, true);
    if (out) *out = r;
    if (r.exit_code != 0) {
      log << r.message << "\npartial outputs in " << c.output_dir << '\n';
      return r.exit_code;
    }
    log << "finished " << r.trace.rows.size() << " iterations in " << fmt(r.seconds) << " s; outputs in "
        << c.output_dir << '\n';
    if (!r.evals.empty()) {
      for (const auto& [k, v] : r.evals.back().metrics) log << "  " << k << " = " << v << '\n';
    }
    if (r.bayes) log << "  bayes_limit = " << r.bayes->mean << " +- " << r.bayes->stddev << '\n';
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return 3;
  }
}

void write_comparison_plot(const std::string& path, const std::string& metric,
                           const std::vector<std::pair<std::string, ExperimentResult>>& runs, int smooth) {
  std::vector<Series> series;
  for (const auto& [label, r] : runs) {
    series.push_back({label, r.eval_iters(), moving_average(r.metric(metric), smooth)});
  }
  if (!runs.empty() && runs.front().second.bayes && metric == "jsd") {
    const auto xs = runs.front().second.eval_iters();
    if (!xs.empty()) {
      const double b = runs.front().second.bayes->mean;
      series.push_back({"bayes limit", {xs.front(), xs.back()}, {b, b}});
    }
  }
  write_text_file(path, svg_line_chart(metric, "iteration", series));
}

}  // namespace fogan::eval
