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

#include "fogan/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fogan/error.hpp"

namespace fogan::eval {

NGramDistribution::NGramDistribution(int n) : n_(n) {
  if (n < 1) throw UsageError("n-gram order must be >= 1");
}

NGramDistribution NGramDistribution::from_sequences(std::span<const Sequence> sequences, int n) {
  NGramDistribution d(n);
  for (const auto& s : sequences) d.add(s);
  return d;
}

void NGramDistribution::add(const Sequence& sequence) {
  const auto n = static_cast<std::size_t>(n_);
  if (sequence.size() < n) return;
  for (std::size_t k = 0; k + n <= sequence.size(); ++k) {
    ++counts_[Sequence(sequence.begin() + static_cast<std::ptrdiff_t>(k),
                       sequence.begin() + static_cast<std::ptrdiff_t>(k + n))];
    ++total_;
  }
}

double NGramDistribution::probability(const Sequence& gram) const {
  if (total_ == 0) return 0.0;
  const auto it = counts_.find(gram);
  return it == counts_.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total_);
}

double ngram_jsd(const NGramDistribution& a, const NGramDistribution& b) {
  if (a.n() != b.n()) throw UsageError("ngram_jsd: orders differ");
  if (a.total() == 0 || b.total() == 0) throw UsageError("ngram_jsd: empty distribution");
  const double ta = static_cast<double>(a.total());
  const double tb = static_cast<double>(b.total());
  // Walk the two sorted maps together; the sum is symmetric term by term.
  auto term = [](double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; };
  double sum = 0.0;
  auto ia = a.counts().begin();
  auto ib = b.counts().begin();
  while (ia != a.counts().end() || ib != b.counts().end()) {
    double pa = 0.0;
    double pb = 0.0;
    if (ib == b.counts().end() || (ia != a.counts().end() && ia->first < ib->first)) {
      pa = static_cast<double>(ia->second) / ta;
      ++ia;
    } else if (ia == a.counts().end() || ib->first < ia->first) {
      pb = static_cast<double>(ib->second) / tb;
      ++ib;
    } else {
      pa = static_cast<double>(ia->second) / ta;
      pb = static_cast<double>(ib->second) / tb;
      ++ia;
      ++ib;
    }
    const double m = 0.5 * (pa + pb);
    sum += 0.5 * (term(pa, m) + term(pb, m));
  }
  return std::clamp(sum, 0.0, 1.0);
}

BayesLimit bayes_limit(std::span<const Sequence> corpus, int n, std::size_t sample_size, int repeats,
                       std::uint64_t seed) {
  if (repeats < 1) throw UsageError("bayes_limit: repeats must be >= 1");
  if (sample_size < 1) throw UsageError("bayes_limit: sample_size must be >= 1");
  if (corpus.size() < 2 * sample_size) {
    throw UsageError("bayes_limit: corpus too small for two disjoint samples");
  }
  Rng rng(seed);
  std::vector<std::size_t> order(corpus.size());
  std::vector<double> values;
  for (int r = 0; r < repeats; ++r) {
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first 2 * sample_size slots are a uniform draw.
    for (std::size_t k = 0; k < 2 * sample_size; ++k) {
      const std::size_t pick = k + rng.index(order.size() - k);
      std::swap(order[k], order[pick]);
    }
    NGramDistribution a(n);
    NGramDistribution b(n);
    for (std::size_t k = 0; k < sample_size; ++k) {
      a.add(corpus[order[k]]);
      b.add(corpus[order[sample_size + k]]);
    }
    values.push_back(ngram_jsd(a, b));
  }
  BayesLimit out;
  out.repeats = repeats;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / repeats;
  if (repeats == 1) {
    out.warning = "bayes_limit: a single repeat gives no spread; stddev reported as 0";
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / (repeats - 1));
  return out;
}

int mode_coverage(const EmpiricalMeasure& samples, std::span<const Point> centers, double radius,
                  double min_frac) {
  if (!(radius > 0.0)) throw UsageError("mode_coverage: radius must be > 0");
  if (!(min_frac > 0.0 && min_frac < 1.0)) throw UsageError("mode_coverage: min_frac must be in (0,1)");
  int covered = 0;
  for (const auto& c : centers) {
    if (c.size() != static_cast<std::size_t>(samples.dim())) {
      throw ShapeError("mode_coverage: center dimension mismatch");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (euclidean(samples.point(i), c) <= radius) mass += samples.weight(i);
    }
    if (mass >= min_frac - 1e-12) ++covered;  // summed weights carry rounding
  }
  return covered;
}

std::vector<Point> ring_centers(int count, double radius) {
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * 3.141592653589793 * k / count;
    out.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return out;
}

}  // namespace fogan::eval
