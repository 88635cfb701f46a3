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

#include "fogan/eval/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "fogan/error.hpp"

namespace fogan::eval {

std::string to_string(Task t) {
  switch (t) {
    case Task::Dirac1d: return "dirac1d";
    case Task::Uniform1d: return "uniform1d";
    case Task::Ring2d: return "ring2d";
    case Task::ToyText: return "toytext";
  }
  return "unknown";
}

Task parse_task(const std::string& name) {
  if (name == "dirac1d") return Task::Dirac1d;
  if (name == "uniform1d") return Task::Uniform1d;
  if (name == "ring2d") return Task::Ring2d;
  if (name == "toytext") return Task::ToyText;
  throw ConfigError("unknown task '" + name + "'");
}

void ExperimentConfig::validate() const {
  train.validate();
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (eval_samples < 1) throw ConfigError("eval_samples must be >= 1");
  if (task == Task::ToyText && eval_samples < 100) {
    throw ConfigError("eval_samples must be >= 100 for n-gram JSD");
  }
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  for (int h : critic_hidden) {
    if (h < 1) throw ConfigError("critic_hidden sizes must be >= 1");
  }
  for (int h : generator_hidden) {
    if (h < 1) throw ConfigError("generator_hidden sizes must be >= 1");
  }
  if (ngram_n < 1) throw ConfigError("ngram_n must be >= 1");
  if (task == Task::ToyText && corpus_size < 2 * eval_samples) {
    throw ConfigError("corpus_size must hold two disjoint evaluation samples");
  }
  if (bayes_repeats < 1) throw ConfigError("bayes_repeats must be >= 1");
  if (smooth < 1) throw ConfigError("smooth must be >= 1");
  if (!(ring_radius > 0.0) || !(ring_sigma > 0.0) || ring_modes < 1) {
    throw ConfigError("ring parameters must be positive");
  }
  if (task == Task::Uniform1d && !(init_theta > 0.0)) throw ConfigError("init_theta must be > 0");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::vector<int> to_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (trim(v).empty() || trim(v) == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(to_int(key, trim(item))));
  return out;
}

std::string join(const std::vector<int>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"task", [](auto& c, auto&, auto& v) { c.task = parse_task(v); }},
      {"eval_every", [](auto& c, auto& k, auto& v) { c.eval_every = static_cast<int>(to_int(k, v)); }},
      {"eval_samples", [](auto& c, auto& k, auto& v) { c.eval_samples = static_cast<int>(to_int(k, v)); }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"critic_hidden", [](auto& c, auto& k, auto& v) { c.critic_hidden = to_list(k, v); }},
      {"generator_hidden", [](auto& c, auto& k, auto& v) { c.generator_hidden = to_list(k, v); }},
      {"activation", [](auto& c, auto&, auto& v) { c.activation = parse_activation(v); }},
      {"latent_dim", [](auto& c, auto& k, auto& v) { c.latent_dim = static_cast<int>(to_int(k, v)); }},
      {"init_theta", [](auto& c, auto& k, auto& v) { c.init_theta = to_double(k, v); }},
      {"ring_radius", [](auto& c, auto& k, auto& v) { c.ring_radius = to_double(k, v); }},
      {"ring_sigma", [](auto& c, auto& k, auto& v) { c.ring_sigma = to_double(k, v); }},
      {"ring_modes", [](auto& c, auto& k, auto& v) { c.ring_modes = static_cast<int>(to_int(k, v)); }},
      {"ngram_n", [](auto& c, auto& k, auto& v) { c.ngram_n = static_cast<int>(to_int(k, v)); }},
      {"corpus_size", [](auto& c, auto& k, auto& v) { c.corpus_size = static_cast<int>(to_int(k, v)); }},
      {"bayes_repeats", [](auto& c, auto& k, auto& v) { c.bayes_repeats = static_cast<int>(to_int(k, v)); }},
      {"smooth", [](auto& c, auto& k, auto& v) { c.smooth = static_cast<int>(to_int(k, v)); }},
      {"train.critic_lr", [](auto& c, auto& k, auto& v) { c.train.critic_lr = to_double(k, v); }},
      {"train.generator_lr", [](auto& c, auto& k, auto& v) { c.train.generator_lr = to_double(k, v); }},
      {"train.critic_iters", [](auto& c, auto& k, auto& v) { c.train.critic_iters = static_cast<int>(to_int(k, v)); }},
      {"train.batch_size", [](auto& c, auto& k, auto& v) { c.train.batch_size = static_cast<int>(to_int(k, v)); }},
      {"train.stretch",
       [](auto& c, auto& k, auto& v) {
         // A number sets epsilon; "none" samples Q_theta directly.
         if (v == "none") {
           c.train.stretch.reset();
         } else {
           c.train.stretch = StretchSpec{to_double(k, v)};
         }
       }},
      {"train.optimizer", [](auto& c, auto&, auto& v) { c.train.optimizer.kind = parse_optimizer(v); }},
      {"train.adam_beta1", [](auto& c, auto& k, auto& v) { c.train.optimizer.beta1 = to_double(k, v); }},
      {"train.adam_beta2", [](auto& c, auto& k, auto& v) { c.train.optimizer.beta2 = to_double(k, v); }},
      {"train.adam_epsilon", [](auto& c, auto& k, auto& v) { c.train.optimizer.epsilon = to_double(k, v); }},
      {"train.seed", [](auto& c, auto& k, auto& v) { c.train.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"train.total_iters", [](auto& c, auto& k, auto& v) { c.train.total_iters = static_cast<int>(to_int(k, v)); }},
      {"train.rule", [](auto& c, auto&, auto& v) { c.train.rule = parse_update_rule(v); }},
      {"train.lr_drop_iter", [](auto& c, auto& k, auto& v) { c.train.lr_drop_iter = static_cast<int>(to_int(k, v)); }},
      {"train.divergence.kind", [](auto& c, auto&, auto& v) { c.train.divergence.kind = parse_divergence_kind(v); }},
      {"train.divergence.lambda", [](auto& c, auto& k, auto& v) { c.train.divergence.lambda = to_double(k, v); }},
      {"train.divergence.mu", [](auto& c, auto& k, auto& v) { c.train.divergence.mu = to_double(k, v); }},
      {"train.divergence.gp_weight", [](auto& c, auto& k, auto& v) { c.train.divergence.gp_weight = to_double(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = parse_config(buf.str());
  if (const char* env = std::getenv("FOGAN_SEED"); env && *env) {
    c.train.seed = static_cast<std::uint64_t>(to_int("FOGAN_SEED", env));
  }
  return c;
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  const auto& t = c.train;
  o << "task = " << to_string(c.task) << "\n"
    << "eval_every = " << c.eval_every << "\n"
    << "eval_samples = " << c.eval_samples << "\n"
    << "output_dir = " << c.output_dir << "\n"
    << "critic_hidden = " << join(c.critic_hidden) << "\n"
    << "generator_hidden = " << join(c.generator_hidden) << "\n"
    << "activation = " << to_string(c.activation) << "\n"
    << "latent_dim = " << c.latent_dim << "\n"
    << "init_theta = " << c.init_theta << "\n"
    << "ring_radius = " << c.ring_radius << "\n"
    << "ring_sigma = " << c.ring_sigma << "\n"
    << "ring_modes = " << c.ring_modes << "\n"
    << "ngram_n = " << c.ngram_n << "\n"
    << "corpus_size = " << c.corpus_size << "\n"
    << "bayes_repeats = " << c.bayes_repeats << "\n"
    << "smooth = " << c.smooth << "\n"
    << "train.critic_lr = " << t.critic_lr << "\n"
    << "train.generator_lr = " << t.generator_lr << "\n"
    << "train.critic_iters = " << t.critic_iters << "\n"
    << "train.batch_size = " << t.batch_size << "\n";
  if (t.stretch) {
    o << "train.stretch = " << t.stretch->epsilon << "\n";
  } else {
    o << "train.stretch = none\n";
  }
  o << "train.optimizer = " << (t.optimizer.kind == OptimizerKind::Sgd ? "sgd" : "adam") << "\n"
    << "train.adam_beta1 = " << t.optimizer.beta1 << "\n"
    << "train.adam_beta2 = " << t.optimizer.beta2 << "\n"
    << "train.adam_epsilon = " << t.optimizer.epsilon << "\n"
    << "train.seed = " << t.seed << "\n"
    << "train.total_iters = " << t.total_iters << "\n"
    << "train.rule = " << to_string(t.rule) << "\n"
    << "train.lr_drop_iter = " << t.lr_drop_iter << "\n"
    << "train.divergence.kind = " << fogan::to_string(t.divergence.kind) << "\n"
    << "train.divergence.lambda = " << t.divergence.lambda << "\n"
    << "train.divergence.mu = " << t.divergence.mu << "\n"
    << "train.divergence.gp_weight = " << t.divergence.gp_weight << "\n";
  return o.str();
}

}  // namespace fogan::eval
