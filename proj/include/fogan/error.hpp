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

#include <stdexcept>
#include <string>

namespace fogan {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter lies outside the valid domain (theta <= 0 for a uniform
// interval, critic output outside (0,1) for the classic GAN, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Dimension or size mismatch between measures, vectors or networks.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An API was called in a way its contract forbids.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a singular evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The normalizing projection is undefined for this critic.
class DegenerateCriticError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fogan
