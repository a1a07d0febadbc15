/**
 * @file evaluation.hpp
 * @brief Observational vs digital size agreement over paired studies.
 *
 * All statistics are kept as integer ratios; rendering uses fixed precision
 * computed with integer arithmetic.
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hipplan::evaluation {

struct SizePair {
    std::string label;
    int observational_mm = 0;
    int digital_mm = 0;

    friend bool operator==(const SizePair&, const SizePair&) = default;
};

struct ComparisonRow {
    std::string patient_label;
    int size_observational = 0;
    int size_digital = 0;
    int difference = 0;  // digital - observational

    int magnitude() const noexcept { return difference < 0 ? -difference : difference; }

    friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct AgreementReport {
    std::vector<ComparisonRow> rows;
    int tolerance_mm = 0;
    long n = 0;
    long within_tolerance_count = 0;
    long sum_abs_difference = 0;  // mean = sum_abs_difference / n
    std::vector<ComparisonRow> outliers;

    double within_tolerance_rate() const { return static_cast<double>(within_tolerance_count) / n; }
    double mean_abs_difference() const { return static_cast<double>(sum_abs_difference) / n; }
};

/// Errors: EmptyDataset for no pairs; Validation for odd or non-positive
/// sizes, or a negative tolerance.
AgreementReport compare(const std::vector<SizePair>& pairs, int tolerance_mm);

/// Reads `label,observational_mm,digital_mm` CSV. Row order is preserved.
/// Errors: Io when the file cannot be opened; ParseError with the line number
/// for a bad header or row.
std::vector<SizePair> load_pairs(const std::filesystem::path& path);
std::vector<SizePair> parse_pairs(std::istream& in, const std::string& source = {});

/// numerator / denominator rounded half-up to `decimals` places, as text.
std::string format_ratio(long numerator, long denominator, int decimals);

/// "9/10 (90.0%) within ±2; outlier: patient 8 (|diff| 4); mean |diff| 1.0 mm"
std::string summary_line(const AgreementReport& r);

/// Aligned table, summary line, then a `key: value` block.
void write_text_report(std::ostream& out, const AgreementReport& r);

/// Per-row CSV followed by nothing else.
void write_csv_report(std::ostream& out, const AgreementReport& r);

}  // namespace hipplan::evaluation
