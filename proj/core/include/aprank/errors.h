/*
 * Copyright 2026 The aprank Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef APRANK_ERRORS_H_
#define APRANK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace aprank {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths that do not line up, malformed files, unknown graph ops.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A hyperparameter outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Inputs that make a quantity undefined, e.g. a zero-norm embedding.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// A metric requested on a query set without any positive.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameter during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace aprank

#endif  // APRANK_ERRORS_H_
