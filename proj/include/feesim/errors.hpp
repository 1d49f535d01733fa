// Copyright 2026 The feesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEESIM_ERRORS_HPP_
#define FEESIM_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace feesim {

// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller handed in a value outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The fixed-point scan found no self-fulfilling count. Unreachable for
// non-negative network strength (demand is monotone), kept so the solver
// never returns an empty solution silently.
class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

// One or more configuration keys failed validation. `problems()` lists all
// of them, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Persisted data did not match the expected schema or version.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace feesim

#endif  // FEESIM_ERRORS_HPP_
