// Copyright 2026 The Mollow Sensors Authors
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

namespace mollow {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
    InvalidDimension,
    Layout,
    Model,
    Parameter,
    Capacity,
    Regime,
    Degeneracy,
    Solver,
    Precision,
    Convergence,
    Propagation,
    Oracle,
    Feasibility,
    Config,
    Io,
    Integrity,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define MOLLOW_DEFINE_ERROR(Name, Kind)                                   \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

MOLLOW_DEFINE_ERROR(InvalidDimensionError, InvalidDimension)
MOLLOW_DEFINE_ERROR(LayoutError, Layout)
MOLLOW_DEFINE_ERROR(ModelError, Model)
MOLLOW_DEFINE_ERROR(ParameterError, Parameter)
MOLLOW_DEFINE_ERROR(CapacityError, Capacity)
MOLLOW_DEFINE_ERROR(RegimeError, Regime)
MOLLOW_DEFINE_ERROR(DegeneracyError, Degeneracy)
MOLLOW_DEFINE_ERROR(SolverError, Solver)
MOLLOW_DEFINE_ERROR(PrecisionError, Precision)
MOLLOW_DEFINE_ERROR(PropagationError, Propagation)
MOLLOW_DEFINE_ERROR(OracleError, Oracle)
MOLLOW_DEFINE_ERROR(ConfigError, Config)
MOLLOW_DEFINE_ERROR(IoError, Io)

#undef MOLLOW_DEFINE_ERROR

/// Both correlator values are kept so callers can report how far apart they were.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double value_full, double value_half)
        : Error(ErrorKind::Convergence, what), value_full_(value_full), value_half_(value_half) {}

    double value_full() const noexcept { return value_full_; }
    double value_half() const noexcept { return value_half_; }

private:
    double value_full_;
    double value_half_;
};

class FeasibilityError : public Error {
public:
    FeasibilityError(const std::string& what, double best_margin)
        : Error(ErrorKind::Feasibility, what), best_margin_(best_margin) {}

    /// Best achievable margin, in units of the filter linewidth.
    double best_margin() const noexcept { return best_margin_; }

private:
    double best_margin_;
};

class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, long long record_index)
        : Error(ErrorKind::Integrity, what), record_index_(record_index) {}

    long long record_index() const noexcept { return record_index_; }

private:
    long long record_index_;
};

}  // namespace mollow
