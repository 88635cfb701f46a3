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

#include "fogan/eval/corpus.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fogan/error.hpp"

namespace fogan::eval {

MarkovChain2 MarkovChain2::random(int alphabet, double spread, std::uint64_t seed) {
  if (alphabet < 2) throw UsageError("Markov chain needs at least two symbols");
  MarkovChain2 c;
  c.alphabet_ = alphabet;
  const auto k = static_cast<std::size_t>(alphabet);
  c.rows_.resize(k * k * k);
  Rng rng(seed);
  for (std::size_t ctx = 0; ctx < k * k; ++ctx) {
    double total = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      const double w = std::exp(spread * rng.normal());
      c.rows_[ctx * k + s] = w;
      total += w;
    }
    for (std::size_t s = 0; s < k; ++s) c.rows_[ctx * k + s] /= total;
  }
  return c;
}

double MarkovChain2::transition(int a, int b, int next) const {
  const auto k = static_cast<std::size_t>(alphabet_);
  return rows_[(static_cast<std::size_t>(a) * k + static_cast<std::size_t>(b)) * k +
               static_cast<std::size_t>(next)];
}

Sequence MarkovChain2::sample(int length, Rng& rng) const {
  Sequence s;
  s.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    if (t < 2) {
      s.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(alphabet_))));
      continue;
    }
    const double u = rng.uniform();
    double acc = 0.0;
    int next = alphabet_ - 1;
    for (int c = 0; c < alphabet_; ++c) {
      acc += transition(s[s.size() - 2], s.back(), c);
      if (u < acc) {
        next = c;
        break;
      }
    }
    s.push_back(next);
  }
  return s;
}

const MarkovChain2& toy_chain() {
  static const MarkovChain2 chain = MarkovChain2::random(kToyAlphabet, 2.0, kToyChainSeed);
  return chain;
}

std::vector<Sequence> toy_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sequence> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(toy_chain().sample(kToyLength, rng));
  return out;
}

Point one_hot(const Sequence& s, int alphabet) {
  Point x(s.size() * static_cast<std::size_t>(alphabet), 0.0);
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (s[t] < 0 || s[t] >= alphabet) throw DomainError("symbol outside the alphabet");
    x[t * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s[t])] = 1.0;
  }
  return x;
}

Sequence decode_rows(std::span<const double> rows, int alphabet) {
  const auto k = static_cast<std::size_t>(alphabet);
  if (k == 0 || rows.size() % k != 0) throw ShapeError("row length does not divide the output");
  Sequence s;
  for (std::size_t r = 0; r < rows.size() / k; ++r) {
    int best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (rows[r * k + c] > rows[r * k + static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    s.push_back(best);
  }
  return s;
}

std::vector<Sequence> text_to_sequences(const std::string& text) {
  std::vector<Sequence> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Sequence s;
    for (unsigned char c : line) s.push_back(c);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sequence> read_text_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open corpus '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return text_to_sequences(buf.str());
}

std::string sequence_to_text(const Sequence& s) {
  std::string out;
  for (int c : s) out.push_back(c < 26 ? static_cast<char>('a' + c) : static_cast<char>(c));
  return out;
}

EmpiricalMeasure parse_point_csv(const std::string& text) {
  std::vector<Point> pts;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    Point x;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        throw UsageError("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      x.push_back(v);
    }
    if (!pts.empty() && x.size() != pts.front().size()) {
      throw ShapeError("line " + std::to_string(lineno) + ": expected " + std::to_string(pts.front().size()) +
                       " coordinates");
    }
    pts.push_back(std::move(x));
  }
  if (pts.empty()) throw UsageError("point file has no points");
  return EmpiricalMeasure(std::move(pts));
}

EmpiricalMeasure read_point_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open point file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_point_csv(buf.str());
}

}  // namespace fogan::eval
