/**
 * @file text.hpp
 * @brief Small text helpers shared by the file readers.
 */
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hipplan::text {

std::string_view trim(std::string_view s);

/// Drops everything from the first '#'.
std::string_view strip_comment(std::string_view s);

std::vector<std::string> split_ws(std::string_view s);

/// Splits on commas and trims each field. No quoting.
std::vector<std::string> split_csv(std::string_view s);

/// Whole-token parses; nullopt on trailing garbage, empty input or overflow.
std::optional<int> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace hipplan::text
