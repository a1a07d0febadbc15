#include <hipplan/evaluation.hpp>
#include <hipplan/error.hpp>
#include <hipplan/text.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace hipplan::evaluation {

namespace {

constexpr std::string_view kHeader = "label,observational_mm,digital_mm";

void require_size(const SizePair& p, int value, const char* column) {
    if (value <= 0 || value % 2 != 0) {
        throw Error(ErrorCode::Validation, "pair '" + p.label + "': " + column + " size " +
                                               std::to_string(value) +
                                               " mm must be an even positive integer");
    }
}

std::string signed_magnitude(int difference) {
    return difference == 0 ? "0" : "±" + std::to_string(difference < 0 ? -difference : difference);
}

}  // namespace

AgreementReport compare(const std::vector<SizePair>& pairs, int tolerance_mm) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyDataset, "compare: no pairs to compare");
    if (tolerance_mm < 0) throw Error(ErrorCode::Validation, "compare: tolerance must be >= 0");

    AgreementReport r;
    r.tolerance_mm = tolerance_mm;
    for (const auto& p : pairs) {
        require_size(p, p.observational_mm, "observational");
        require_size(p, p.digital_mm, "digital");
        ComparisonRow row{p.label, p.observational_mm, p.digital_mm, p.digital_mm - p.observational_mm};
        ++r.n;
        r.sum_abs_difference += row.magnitude();
        if (row.magnitude() <= tolerance_mm) {
            ++r.within_tolerance_count;
        } else {
            r.outliers.push_back(row);
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::vector<SizePair> parse_pairs(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != kHeader) {
        throw ParseError(source, 1, "expected header '" + std::string(kHeader) + "'");
    }
    std::vector<SizePair> out;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        const auto cells = text::split_csv(line);
        if (cells.size() != 3) {
            throw ParseError(source, n, "expected 3 fields, got " + std::to_string(cells.size()));
        }
        auto obs = text::parse_int(cells[1]);
        auto dig = text::parse_int(cells[2]);
        if (!obs) throw ParseError(source, n, "observational_mm: not an integer: '" + cells[1] + "'");
        if (!dig) throw ParseError(source, n, "digital_mm: not an integer: '" + cells[2] + "'");
        out.push_back({cells[0], *obs, *dig});
    }
    return out;
}

std::vector<SizePair> load_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return parse_pairs(in, path.string());
}

std::string format_ratio(long numerator, long denominator, int decimals) {
    long scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool negative = (numerator < 0) != (denominator < 0) && numerator != 0;
    const long num = numerator < 0 ? -numerator : numerator;
    const long den = denominator < 0 ? -denominator : denominator;
    const long q = (2 * num * scale + den) / (2 * den);
    std::string out = (negative ? "-" : "") + std::to_string(q / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(q % scale);
        out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
    }
    return out;
}

std::string summary_line(const AgreementReport& r) {
    std::string out = std::to_string(r.within_tolerance_count) + "/" + std::to_string(r.n) + " (" +
                      format_ratio(r.within_tolerance_count * 100, r.n, 1) + "%) within ±" +
                      std::to_string(r.tolerance_mm) + "; ";
    if (r.outliers.empty()) {
        out += "no outliers";
    } else {
        out += r.outliers.size() == 1 ? "outlier: " : "outliers: ";
        for (std::size_t i = 0; i < r.outliers.size(); ++i) {
            if (i) out += ", ";
            out += "patient " + r.outliers[i].patient_label + " (|diff| " +
                   std::to_string(r.outliers[i].magnitude()) + ")";
        }
    }
    out += "; mean |diff| " + format_ratio(r.sum_abs_difference, r.n, 1) + " mm";
    return out;
}

void write_text_report(std::ostream& out, const AgreementReport& r) {
    const std::string h0 = "patient";
    const std::string h1 = "observational_mm";
    const std::string h2 = "digital_mm";
    std::size_t w0 = h0.size();
    for (const auto& row : r.rows) w0 = std::max(w0, row.patient_label.size());
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    out << pad(h0, w0) << "  " << h1 << "  " << h2 << "  difference\n";
    for (const auto& row : r.rows) {
        out << pad(row.patient_label, w0) << "  " << pad(std::to_string(row.size_observational), h1.size())
            << "  " << pad(std::to_string(row.size_digital), h2.size()) << "  "
            << signed_magnitude(row.difference) << '\n';
    }
    out << '\n' << summary_line(r) << "\n\n";
    out << "n: " << r.n << '\n';
    out << "tolerance_mm: " << r.tolerance_mm << '\n';
    out << "within_tolerance_count: " << r.within_tolerance_count << '\n';
    out << "within_tolerance_rate: " << format_ratio(r.within_tolerance_count, r.n, 3) << '\n';
    out << "mean_abs_difference_mm: " << format_ratio(r.sum_abs_difference, r.n, 3) << '\n';
    out << "outliers:";
    for (const auto& o : r.outliers) out << ' ' << o.patient_label;
    out << '\n';
}

void write_csv_report(std::ostream& out, const AgreementReport& r) {
    out << "label,observational_mm,digital_mm,difference,within_tolerance\n";
    for (const auto& row : r.rows) {
        out << row.patient_label << ',' << row.size_observational << ',' << row.size_digital << ','
            << row.difference << ',' << (row.magnitude() <= r.tolerance_mm ? "yes" : "no") << '\n';
    }
}

}  // namespace hipplan::evaluation
