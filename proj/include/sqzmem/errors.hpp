#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqzmem {

enum class ErrorCode {
    invalid_parameter,
    cutoff_too_small,
    unphysical_state,
    invalid_state,
    dimension_mismatch,
    grid_out_of_range,
    zero_energy,
    config_inconsistency,
    window_mismatch,
    insufficient_samples,
    insufficient_coverage,
    low_contrast,
    degenerate_phase,
    seed_reuse,
    fit_error,
    malformed_csv,
    io_error,
    config_error,
};

const char* to_string(ErrorCode code);

/// Base of every error thrown by the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

template <ErrorCode C>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(C, what) {}
};

using InvalidParameterError = TypedError<ErrorCode::invalid_parameter>;
using CutoffTooSmallError = TypedError<ErrorCode::cutoff_too_small>;
using UnphysicalStateError = TypedError<ErrorCode::unphysical_state>;
using InvalidStateError = TypedError<ErrorCode::invalid_state>;
using DimensionMismatchError = TypedError<ErrorCode::dimension_mismatch>;
using GridOutOfRangeError = TypedError<ErrorCode::grid_out_of_range>;
using ZeroEnergyError = TypedError<ErrorCode::zero_energy>;
using ConfigInconsistencyError = TypedError<ErrorCode::config_inconsistency>;
using WindowMismatchError = TypedError<ErrorCode::window_mismatch>;
using InsufficientSamplesError = TypedError<ErrorCode::insufficient_samples>;
using InsufficientCoverageError = TypedError<ErrorCode::insufficient_coverage>;
using LowContrastError = TypedError<ErrorCode::low_contrast>;
using DegeneratePhaseError = TypedError<ErrorCode::degenerate_phase>;
using SeedReuseError = TypedError<ErrorCode::seed_reuse>;
using FitError = TypedError<ErrorCode::fit_error>;
using IoError = TypedError<ErrorCode::io_error>;
using ConfigError = TypedError<ErrorCode::config_error>;

/// Malformed CSV input; `line()` is 1-based, 0 when the whole file is unusable.
class MalformedCsvError : public Error {
public:
    MalformedCsvError(std::size_t line, const std::string& what)
        : Error(ErrorCode::malformed_csv, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace sqzmem
