/**
 * @file sizing.hpp
 * @brief Acetabular cup size recognition from a measured diameter.
 *
 * A measured diameter is mapped to a catalog size by:
 *   1. rounding the value to 6 decimals (absorbs pixel arithmetic noise),
 *   2. taking the floor,
 *   3. stepping an odd result down to the even size below it,
 *   4. rejecting the result when it falls outside the catalog's size range.
 * Sizes are never rounded up.
 */
#pragma once

#include <hipplan/geometry.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hipplan::sizing {

/// Hard bounds for any cup the catalog may list.
inline constexpr int kMinCupSizeMm = 36;
inline constexpr int kMaxCupSizeMm = 80;

enum class Side { Left, Right };

std::string_view to_string(Side side);
/// Accepts "left" / "right" (case-sensitive); nullopt otherwise.
std::optional<Side> parse_side(std::string_view text);

struct ImplantSpec {
    std::string brand;
    Side side = Side::Left;
    int size_mm = 0;
    std::string outline_id;
    /// Silhouette in template millimeters (1 px = 1 mm). The cup diameter runs
    /// along the x axis and the template center sits at the origin.
    geometry::Outline outline;
};

struct CatalogViolation {
    enum class Kind { Syntax, Parity, Range, Duplicate, Contiguity, MissingSide, Brand, Outline };

    Kind kind;
    std::string source;  // file the line refers to; empty for in-memory catalogs
    std::size_t line = 0;
    std::string message;
};

std::string_view to_string(CatalogViolation::Kind kind);

/// Checks the catalog invariants over a set of entries: even sizes within the
/// cup bounds, no duplicates, contiguous steps of 2, both sides for every
/// size, a single brand, and outlines whose span matches the nominal size.
/// `lines` (optional, parallel to `entries`) attaches source line numbers.
std::vector<CatalogViolation> validate_entries(std::span<const ImplantSpec> entries,
                                               std::span<const std::size_t> lines = {},
                                               const std::string& source = {});

/// Largest allowed gap between an outline's vertex span and its nominal size.
inline constexpr double kOutlineSpanToleranceMm = 0.5;

class ImplantCatalog {
public:
    /// Throws Error(Validation) with the first violation when the entries
    /// break a catalog invariant.
    static ImplantCatalog make(std::vector<ImplantSpec> entries);

    /// Every even size from min_size to max_size on both sides, with
    /// half-disc cup outlines of `arc_segments` segments.
    static ImplantCatalog standard(std::string brand, int min_size = kMinCupSizeMm,
                                   int max_size = kMaxCupSizeMm, int arc_segments = 32);

    const std::string& brand() const noexcept { return brand_; }
    int min_size() const noexcept { return min_size_; }
    int max_size() const noexcept { return max_size_; }
    std::vector<int> sizes() const;
    bool contains(Side side, int size_mm) const;
    const std::vector<ImplantSpec>& entries() const noexcept { return entries_; }

    /// Throws Error(NotFound) when the (side, size) pair is not listed.
    const ImplantSpec& at(Side side, int size_mm) const;

private:
    ImplantCatalog() = default;

    std::string brand_;
    int min_size_ = 0;
    int max_size_ = 0;
    std::vector<ImplantSpec> entries_;
    std::map<std::pair<Side, int>, std::size_t> index_;
};

/// Half-disc cup silhouette: diameter from (-d/2, 0) to (d/2, 0), dome toward -y.
geometry::Outline cup_outline(double diameter_mm, int arc_segments = 32);

enum class RejectReason { BelowMin, AboveMax };

std::string_view to_string(RejectReason reason);

struct SizingResult {
    double measured_mm = 0.0;
    std::optional<int> snapped_size_mm;
    std::optional<RejectReason> rejected_reason;

    bool accepted() const noexcept { return snapped_size_mm.has_value(); }

    friend bool operator==(const SizingResult&, const SizingResult&) = default;
};

/// Throws Error(InvalidMeasurement) for non-finite or non-positive input.
SizingResult snap_to_size(double measured_mm, const ImplantCatalog& catalog);

/// Measures the segment, converts to mm and snaps. Throws
/// Error(InvalidMeasurement) for a zero-length segment.
SizingResult measure_and_size(const geometry::SegmentPx& s, const geometry::Calibration& c,
                              const ImplantCatalog& catalog);

/// Throws Error(NotFound) when the size is not in the catalog (odd, out of range, missing).
const ImplantSpec& lookup_template(const ImplantCatalog& catalog, Side side, int size_mm);

}  // namespace hipplan::sizing
