/**
 * @file error.hpp
 * @brief Exception type shared by all hipplan modules.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hipplan {

/// Error categories. The service maps these onto its closed API error set.
enum class ErrorCode {
    InvalidGeometry,
    Calibration,
    InvalidMeasurement,
    SizeOutOfRange,
    CalibrationMissing,
    NoPlacement,
    NotFound,
    State,
    Consistency,
    Validation,
    EmptyDataset,
    Parse,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure tied to a location in a text source. line is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

}  // namespace hipplan
