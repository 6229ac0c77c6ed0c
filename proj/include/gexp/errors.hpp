/*
   Copyright 2026 The gexp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace gexp {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: bad parameters, dimension mismatches, invalid configs.
// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotPsdError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical failure during a computation (exit code 2).
class ComputationError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public ComputationError {
public:
    using ComputationError::ComputationError;
};

} // namespace gexp
