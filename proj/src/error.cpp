#include <hipplan/error.hpp>

namespace hipplan {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidGeometry: return "invalid_geometry";
        case ErrorCode::Calibration: return "calibration";
        case ErrorCode::InvalidMeasurement: return "invalid_measurement";
        case ErrorCode::SizeOutOfRange: return "size_out_of_range";
        case ErrorCode::CalibrationMissing: return "calibration_missing";
        case ErrorCode::NoPlacement: return "no_placement";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::State: return "state";
        case ErrorCode::Consistency: return "consistency";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::EmptyDataset: return "empty_dataset";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

namespace {
std::string located(const std::string& source, std::size_t line, const std::string& what) {
    std::string msg;
    if (!source.empty()) msg = source + ": ";
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    return msg + what;
}
}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(ErrorCode::Parse, located(source, line, what)), source_(source), line_(line) {}

}  // namespace hipplan
