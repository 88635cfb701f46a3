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
#include <span>
#include <string>
#include <vector>

#include "fogan/eval/metrics.hpp"
#include "fogan/measures.hpp"
#include "fogan/rng.hpp"

namespace fogan::eval {

inline constexpr int kToyAlphabet = 8;
inline constexpr int kToyLength = 16;
inline constexpr std::uint64_t kToyChainSeed = 0x5eed'c0de'2019ULL;

// Second-order Markov chain: the first two symbols are uniform, every later
// symbol is drawn from a distribution indexed by the two symbols before it.
class MarkovChain2 {
 public:
  // Transition rows are softmax(spread * normal) draws, so larger spread
  // means a more predictable chain.
  static MarkovChain2 random(int alphabet, double spread, std::uint64_t seed);

  int alphabet() const { return alphabet_; }
  double transition(int a, int b, int next) const;
  Sequence sample(int length, Rng& rng) const;

 private:
  int alphabet_ = 0;
  std::vector<double> rows_;  // [a][b][next], alphabet^3 entries
};

// The fixed toy chain used by the toytext task.
const MarkovChain2& toy_chain();

std::vector<Sequence> toy_corpus(std::size_t count, std::uint64_t seed);

// Flattened one-hot rows, length * alphabet values.
Point one_hot(const Sequence& s, int alphabet);

// Argmax of each consecutive row of `alphabet` values.
Sequence decode_rows(std::span<const double> rows, int alphabet);

// Text corpus: one sequence per line, symbols are bytes.
std::vector<Sequence> read_text_corpus(const std::string& path);
std::vector<Sequence> text_to_sequences(const std::string& text);
std::string sequence_to_text(const Sequence& s);

// Point sets as CSV: one point per line, comma-separated coordinates. Blank
// lines and lines starting with '#' are skipped.
EmpiricalMeasure parse_point_csv(const std::string& text);
EmpiricalMeasure read_point_csv(const std::string& path);

}  // namespace fogan::eval
