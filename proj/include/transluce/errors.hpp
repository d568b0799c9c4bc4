/*
 * Copyright (C) 2026 The Transluce Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace transluce {

/// Base of all library exceptions. Subclasses pick the broad category the
/// C API and CLI map to error/exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments, shapes, or values supplied by the caller.
struct InvalidArgumentError : Error {
    using Error::Error;
};

/// A physical value outside its declared range (beyond epsilon).
struct OutOfRangeError : InvalidArgumentError {
    OutOfRangeError(const std::string& name, double value)
        : InvalidArgumentError("parameter '" + name + "' out of range: " + std::to_string(value)),
          name(name),
          value(value) {}
    std::string name;
    double value;
};

struct ShapeMismatchError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct NotUnitError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct InvalidTError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct MaskEmptyError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct EmptyEnvMapError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct EmptyListError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct ZeroExtinctionError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct NotWatertightError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct DegenerateGeometryError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct StepTooSmallError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

struct EmptyCatalogError : InvalidArgumentError {
    using InvalidArgumentError::InvalidArgumentError;
};

/// File and serialization failures.
struct IoError : Error {
    using Error::Error;
};

struct MissingFileError : IoError {
    using IoError::IoError;
};

/// Malformed or wrong-version scene/manifest documents.
struct SchemaError : Error {
    using Error::Error;
};

struct SchemaVersionMismatchError : SchemaError {
    using SchemaError::SchemaError;
};

struct ChecksumMismatchError : SchemaError {
    using SchemaError::SchemaError;
};

/// Optimizer left the trust region and never came back.
struct DivergenceDetectedError : Error {
    using Error::Error;
};

/// Scene-level failure report entry for corpus builds.
struct PartialFailureError : Error {
    using Error::Error;
};

}  // namespace transluce
