// Copyright 2026 The unlearnlab Authors.
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

#ifndef UNLEARNLAB_ERRORS_H_
#define UNLEARNLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace unlearnlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or inputs violating a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated text documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A stored artifact was produced for a different model configuration.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

// A distribution does not lie on the probability simplex.
class SimplexViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace unlearnlab

#endif  // UNLEARNLAB_ERRORS_H_
