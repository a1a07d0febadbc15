/**
 * @file cli.hpp
 * @brief Batch commands behind the `hipplan` executable.
 */
#pragma once

#include <hipplan/geometry.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hipplan::cli {

struct MeasurementRow {
    std::size_t line = 0;
    std::string label;
    geometry::SegmentPx segment;
    double mm_per_px = 0.0;
};

/// Reads `label,ax,ay,bx,by,mm_per_px`. Throws ParseError with the line
/// number for a bad header, malformed row or non-positive mm_per_px.
std::vector<MeasurementRow> parse_measurements(std::istream& in, const std::string& source = {});

/// Runs one command line (argv[0] is the program name). Output and
/// diagnostics go to the given streams. Returns the process exit code:
/// 0 success, 1 input or validation failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hipplan::cli
