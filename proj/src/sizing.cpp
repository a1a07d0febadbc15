#include <hipplan/sizing.hpp>
#include <hipplan/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hipplan::sizing {

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::optional<Side> parse_side(std::string_view text) {
    if (text == "left") return Side::Left;
    if (text == "right") return Side::Right;
    return std::nullopt;
}

std::string_view to_string(RejectReason reason) {
    return reason == RejectReason::BelowMin ? "below_min" : "above_max";
}

std::string_view to_string(CatalogViolation::Kind kind) {
    using K = CatalogViolation::Kind;
    switch (kind) {
        case K::Syntax: return "syntax";
        case K::Parity: return "parity";
        case K::Range: return "range";
        case K::Duplicate: return "duplicate";
        case K::Contiguity: return "contiguity";
        case K::MissingSide: return "missing-side";
        case K::Brand: return "brand";
        case K::Outline: return "outline";
    }
    return "unknown";
}

std::vector<CatalogViolation> validate_entries(std::span<const ImplantSpec> entries,
                                               std::span<const std::size_t> lines,
                                               const std::string& source) {
    using K = CatalogViolation::Kind;
    std::vector<CatalogViolation> out;
    auto line_of = [&](std::size_t i) { return i < lines.size() ? lines[i] : 0; };
    auto add = [&](K kind, std::size_t line, std::string message) {
        out.push_back({kind, source, line, std::move(message)});
    };

    if (entries.empty()) {
        add(K::Contiguity, 0, "catalog has no entries");
        return out;
    }

    // size -> (side -> line) for entries that passed the per-entry checks
    std::map<int, std::map<Side, std::size_t>> seen;
    const std::string& brand = entries.front().brand;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::size_t line = line_of(i);
        const std::string label = "size " + std::to_string(e.size_mm) + " " +
                                  std::string(to_string(e.side));
        if (e.brand != brand) {
            add(K::Brand, line, label + ": brand '" + e.brand + "' differs from '" + brand + "'");
        }
        if (e.size_mm % 2 != 0) {
            add(K::Parity, line, label + ": cup sizes must be even");
            continue;
        }
        if (e.size_mm < kMinCupSizeMm || e.size_mm > kMaxCupSizeMm) {
            add(K::Range, line, label + ": outside " + std::to_string(kMinCupSizeMm) + "-" +
                                    std::to_string(kMaxCupSizeMm) + " mm");
            continue;
        }
        auto& sides = seen[e.size_mm];
        if (auto it = sides.find(e.side); it != sides.end()) {
            add(K::Duplicate, line,
                label + ": duplicate of line " + std::to_string(it->second));
            continue;
        }
        sides.emplace(e.side, line);
        const double span = geometry::max_vertex_distance(e.outline.vertices());
        if (std::abs(span - e.size_mm) > kOutlineSpanToleranceMm) {
            add(K::Outline, line,
                label + ": outline '" + e.outline_id + "' spans " + std::to_string(span) +
                    " mm, expected " + std::to_string(e.size_mm));
        }
    }

    int prev = 0;
    std::size_t prev_line = 0;
    for (const auto& [size, sides] : seen) {
        const std::size_t line = sides.begin()->second;
        if (prev != 0 && size != prev + 2) {
            for (int missing = prev + 2; missing < size; missing += 2) {
                add(K::Contiguity, line,
                    "size " + std::to_string(missing) + " missing between " +
                        std::to_string(prev) + " (line " + std::to_string(prev_line) + ") and " +
                        std::to_string(size));
            }
        }
        for (Side side : {Side::Left, Side::Right}) {
            if (!sides.contains(side)) {
                add(K::MissingSide, line,
                    "size " + std::to_string(size) + " has no " + std::string(to_string(side)) +
                        " entry");
            }
        }
        prev = size;
        prev_line = line;
    }
    return out;
}

ImplantCatalog ImplantCatalog::make(std::vector<ImplantSpec> entries) {
    const auto violations = validate_entries(entries);
    if (!violations.empty()) {
        throw Error(ErrorCode::Validation, "catalog: " + violations.front().message);
    }
    std::sort(entries.begin(), entries.end(), [](const ImplantSpec& a, const ImplantSpec& b) {
        return std::pair(a.size_mm, a.side) < std::pair(b.size_mm, b.side);
    });
    ImplantCatalog cat;
    cat.brand_ = entries.front().brand;
    cat.min_size_ = entries.front().size_mm;
    cat.max_size_ = entries.back().size_mm;
    cat.entries_ = std::move(entries);
    for (std::size_t i = 0; i < cat.entries_.size(); ++i) {
        cat.index_.emplace(std::pair(cat.entries_[i].side, cat.entries_[i].size_mm), i);
    }
    return cat;
}

geometry::Outline cup_outline(double diameter_mm, int arc_segments) {
    const double r = diameter_mm / 2.0;
    std::vector<geometry::PointPx> v;
    v.reserve(static_cast<std::size_t>(arc_segments) + 1);
    for (int i = 0; i <= arc_segments; ++i) {
        const double theta = std::numbers::pi * i / arc_segments;
        v.push_back({r * std::cos(theta), -r * std::sin(theta)});
    }
    // exact diameter endpoints and apex
    v.front() = {r, 0.0};
    v.back() = {-r, 0.0};
    if (arc_segments % 2 == 0) v[static_cast<std::size_t>(arc_segments / 2)] = {0.0, -r};
    return geometry::Outline::make(std::move(v));
}

ImplantCatalog ImplantCatalog::standard(std::string brand, int min_size, int max_size,
                                        int arc_segments) {
    std::vector<ImplantSpec> entries;
    for (int size = min_size; size <= max_size; size += 2) {
        for (Side side : {Side::Left, Side::Right}) {
            entries.push_back({brand, side, size, "cup" + std::to_string(size),
                               cup_outline(size, arc_segments)});
        }
    }
    return make(std::move(entries));
}

std::vector<int> ImplantCatalog::sizes() const {
    std::vector<int> out;
    for (const auto& e : entries_) {
        if (out.empty() || out.back() != e.size_mm) out.push_back(e.size_mm);
    }
    return out;
}

bool ImplantCatalog::contains(Side side, int size_mm) const {
    return index_.contains({side, size_mm});
}

const ImplantSpec& ImplantCatalog::at(Side side, int size_mm) const {
    auto it = index_.find({side, size_mm});
    if (it == index_.end()) {
        throw Error(ErrorCode::NotFound, "catalog: no " + std::string(to_string(side)) +
                                             " cup of size " + std::to_string(size_mm) +
                                             " mm in " + brand_);
    }
    return entries_[it->second];
}

SizingResult snap_to_size(double measured_mm, const ImplantCatalog& catalog) {
    if (!std::isfinite(measured_mm) || measured_mm <= 0.0) {
        throw Error(ErrorCode::InvalidMeasurement,
                    "measurement: diameter must be finite and > 0 mm");
    }
    // 58 - 1e-13 must measure as 58, not 57.
    const double guarded =
        measured_mm < 1e9 ? std::round(measured_mm * 1e6) / 1e6 : measured_mm;
    double size = std::floor(guarded);
    if (std::fmod(size, 2.0) != 0.0) size -= 1.0;

    SizingResult result;
    result.measured_mm = measured_mm;
    if (size < catalog.min_size()) {
        result.rejected_reason = RejectReason::BelowMin;
    } else if (size > catalog.max_size()) {
        result.rejected_reason = RejectReason::AboveMax;
    } else {
        result.snapped_size_mm = static_cast<int>(size);
    }
    return result;
}

SizingResult measure_and_size(const geometry::SegmentPx& s, const geometry::Calibration& c,
                              const ImplantCatalog& catalog) {
    double px = 0.0;
    try {
        px = geometry::distance_px(s);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidMeasurement, e.what());
    }
    if (px == 0.0) {
        throw Error(ErrorCode::InvalidMeasurement, "measurement: zero-length segment");
    }
    return snap_to_size(geometry::px_to_mm(px, c), catalog);
}

const ImplantSpec& lookup_template(const ImplantCatalog& catalog, Side side, int size_mm) {
    return catalog.at(side, size_mm);
}

}  // namespace hipplan::sizing
