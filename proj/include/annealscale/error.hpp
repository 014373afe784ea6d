// Copyright 2026 The annealscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace annealscale {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain.
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// A request exceeds what a brute-force routine is willing to allocate.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file or table.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// The adaptive integrator could not make progress.
class IntegrationError : public Error {
  public:
    IntegrationError(const std::string& what, double t, double error_estimate)
            : Error(what), t_(t), error_estimate_(error_estimate) {}

    double time() const { return t_; }
    double error_estimate() const { return error_estimate_; }

  private:
    double t_;
    double error_estimate_;
};

}  // namespace annealscale
