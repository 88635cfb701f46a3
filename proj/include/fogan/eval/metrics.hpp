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

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fogan/measures.hpp"

namespace fogan::eval {

using Sequence = std::vector<int>;

class NGramDistribution {
 public:
  explicit NGramDistribution(int n);

  static NGramDistribution from_sequences(std::span<const Sequence> sequences, int n);

  // Counts every window of length n; shorter sequences contribute nothing.
  void add(const Sequence& sequence);

  int n() const { return n_; }
  std::int64_t total() const { return total_; }
  const std::map<Sequence, std::int64_t>& counts() const { return counts_; }
  double probability(const Sequence& gram) const;

 private:
  int n_;
  std::map<Sequence, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
double ngram_jsd(const NGramDistribution& a, const NGramDistribution& b);

struct BayesLimit {
  double mean = 0.0;
  double stddev = 0.0;
  int repeats = 0;
  std::string warning;
};

// JSD between two disjoint random subsets of `sample_size` sequences each,
// averaged over `repeats` draws.
BayesLimit bayes_limit(std::span<const Sequence> corpus, int n, std::size_t sample_size,
                       int repeats, std::uint64_t seed);

// Number of centers holding at least min_frac of the samples within radius.
int mode_coverage(const EmpiricalMeasure& samples, std::span<const Point> centers, double radius,
                  double min_frac);

std::vector<Point> ring_centers(int count, double radius);

}  // namespace fogan::eval
