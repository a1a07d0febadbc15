/**
 * @file catalog_io.hpp
 * @brief Reading, checking and writing implant catalog files.
 *
 * A catalog is a pair of text files; see docs/FORMATS.md for the grammar.
 *   <name>.catalog   one entry per line: brand side size_mm outline_id
 *   <name>.outlines  outline_id vertex_count x1 y1 ... xN yN, whitespace separated
 * `#` starts a comment that runs to the end of the line in both files.
 */
#pragma once

#include <hipplan/sizing.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hipplan::sizing {

/// Companion outline file: same path with the extension replaced by ".outlines".
std::filesystem::path outlines_path_for(const std::filesystem::path& catalog_path);

struct CatalogCheckReport {
    std::filesystem::path catalog_path;
    std::filesystem::path outlines_path;
    std::size_t entry_count = 0;
    std::vector<CatalogViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Parses both files and reports every violation found (syntax, parity,
/// range, duplicates, contiguity, missing sides, brand, outline validity).
/// Throws Error(Io) only when a file cannot be opened.
CatalogCheckReport check_catalog_file(const std::filesystem::path& catalog_path);

/// Loads a catalog. Throws ParseError naming the file and line of the first
/// violation, or Error(Io) when a file cannot be opened.
ImplantCatalog load_catalog(const std::filesystem::path& catalog_path);

/// Writes `<catalog_path>` and its companion outline file.
void write_catalog(const ImplantCatalog& catalog, const std::filesystem::path& catalog_path);

}  // namespace hipplan::sizing
