// Copyright 2026 The mallineage Authors. All Rights Reserved.
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

#ifndef MALLINEAGE_ERRORS_HPP
#define MALLINEAGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mallineage {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: bad JSON, schema mismatch, invariant violations,
/// inconsistent ids. The CLI maps these to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class UnknownId : public DataError {
public:
    using DataError::DataError;
};

class IdMismatch : public DataError {
public:
    using DataError::DataError;
};

class NodeSetMismatch : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public DataError {
public:
    using DataError::DataError;
};

class EmptyFeatureSet : public DataError {
public:
    using DataError::DataError;
};

class InputTooShort : public DataError {
public:
    using DataError::DataError;
};

class OutOfWindow : public DataError {
public:
    using DataError::DataError;
};

class EmptyTrainingSet : public DataError {
public:
    using DataError::DataError;
};

class InvalidParentSet : public DataError {
public:
    using DataError::DataError;
};

class InvalidLineage : public DataError {
public:
    using DataError::DataError;
};

class TooLarge : public DataError {
public:
    using DataError::DataError;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Inference could not reach a state with non-zero probability.
/// The CLI maps these to exit code 3.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class DegenerateEvidence : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class InfeasibleSkeleton : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

} // namespace mallineage

#endif
