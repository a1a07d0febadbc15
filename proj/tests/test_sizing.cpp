#include <hipplan/error.hpp>
#include <hipplan/sizing.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"

namespace hipplan::sizing {
namespace {

using geometry::Calibration;
using geometry::SegmentPx;

const ImplantCatalog& catalog() {
    static const ImplantCatalog c = ImplantCatalog::standard("Versys");
    return c;
}

std::optional<int> snapped(double mm) { return snap_to_size(mm, catalog()).snapped_size_mm; }

TEST(SnapToSize, WorkedExamples) {
    EXPECT_EQ(snapped(64.15), 64);
    EXPECT_EQ(snapped(58.28), 58);
    EXPECT_EQ(snapped(59.25), 58);
}

TEST(SnapToSize, MeasuredDistances) {
    const std::pair<double, int> table[] = {{48.58, 48}, {57.45, 56}, {58.15, 58}, {53.36, 52},
                                            {66.45, 66}, {69.13, 68}, {72.78, 72}, {77.67, 76}};
    for (auto [mm, size] : table) EXPECT_EQ(snapped(mm), size) << mm;
}

TEST(SnapToSize, RangeBoundaries) {
    EXPECT_EQ(snapped(36.0), 36);
    const auto low = snap_to_size(35.99, catalog());
    EXPECT_FALSE(low.accepted());
    EXPECT_EQ(low.rejected_reason, RejectReason::BelowMin);
    EXPECT_DOUBLE_EQ(low.measured_mm, 35.99);

    EXPECT_EQ(snapped(81.7), 80);
    const auto high = snap_to_size(82.0, catalog());
    EXPECT_FALSE(high.accepted());
    EXPECT_EQ(high.rejected_reason, RejectReason::AboveMax);
}

TEST(SnapToSize, ParityOfExactIntegers) {
    EXPECT_EQ(snapped(58.0), 58);
    EXPECT_EQ(snapped(59.0), 58);
}

TEST(SnapToSize, FloatingNoiseDoesNotFlipSize) {
    EXPECT_EQ(snapped(58.0 - 1e-13), 58);
    EXPECT_EQ(snapped(0.1 * 580), 58);
    EXPECT_EQ(snapped(57.999), 56);
}

TEST(SnapToSize, RejectsInvalidMeasurements) {
    for (double bad : {0.0, -4.0, std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::infinity()}) {
        try {
            snap_to_size(bad, catalog());
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidMeasurement);
        }
    }
}

TEST(SnapToSize, IdempotentOnCatalogSizes) {
    for (int k = 36; k <= 80; k += 2) EXPECT_EQ(snapped(k), k);
}

TEST(SnapToSize, ResultInvariants) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> mm(0.01, 150.0);
    for (int i = 0; i < 20000; ++i) {
        const double m = mm(rng);
        const auto r = snap_to_size(m, catalog());
        ASSERT_NE(r.snapped_size_mm.has_value(), r.rejected_reason.has_value());
        if (r.accepted()) {
            ASSERT_EQ(*r.snapped_size_mm % 2, 0);
            ASSERT_GE(*r.snapped_size_mm, 36);
            ASSERT_LE(*r.snapped_size_mm, 80);
            ASSERT_LE(*r.snapped_size_mm, m);  // never rounds up
        }
    }
}

TEST(SnapToSize, Monotone) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> mm(30.0, 90.0);
    for (int i = 0; i < 20000; ++i) {
        double a = mm(rng), b = mm(rng);
        if (a > b) std::swap(a, b);
        const auto ra = snap_to_size(a, catalog()), rb = snap_to_size(b, catalog());
        if (ra.accepted() && rb.accepted()) {
            ASSERT_LE(*ra.snapped_size_mm, *rb.snapped_size_mm);
        }
    }
}

TEST(SnapToSize, MatchesCatalogScanOracle) {
    const auto sizes = oracle::even_sizes(36, 80);
    for (long h = 0; h <= 12000; ++h) {
        const auto want = oracle::snap_hundredths(h, sizes);
        const double mm = static_cast<double>(h) / 100.0;
        if (want.invalid) {
            EXPECT_THROW(snap_to_size(mm, catalog()), Error);
            continue;
        }
        const auto got = snap_to_size(mm, catalog());
        ASSERT_EQ(got.snapped_size_mm, want.size) << mm;
        const std::string reason = got.rejected_reason ? std::string(to_string(*got.rejected_reason)) : "";
        ASSERT_EQ(reason, want.reason) << mm;
    }
}

TEST(SnapToSize, UsesCatalogRange) {
    const auto narrow = ImplantCatalog::standard("Narrow", 44, 60);
    EXPECT_EQ(snap_to_size(43.0, narrow).rejected_reason, RejectReason::BelowMin);
    EXPECT_EQ(snap_to_size(44.5, narrow).snapped_size_mm, 44);
    EXPECT_EQ(snap_to_size(61.9, narrow).snapped_size_mm, 60);
    EXPECT_EQ(snap_to_size(62.0, narrow).rejected_reason, RejectReason::AboveMax);
}

TEST(MeasureAndSize, Examples) {
    const auto r = measure_and_size({{0, 0}, {116.56, 0}}, Calibration::make(0.5), catalog());
    EXPECT_DOUBLE_EQ(r.measured_mm, 58.28);
    EXPECT_EQ(r.snapped_size_mm, 58);

    const auto v = measure_and_size({{10, 10}, {10, 170}}, Calibration::make(0.3), catalog());
    EXPECT_DOUBLE_EQ(v.measured_mm, 48.0);
    EXPECT_EQ(v.snapped_size_mm, 48);
}

TEST(MeasureAndSize, ZeroLengthSegment) {
    try {
        measure_and_size({{0, 0}, {0, 0}}, Calibration::make(0.5), catalog());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidMeasurement);
    }
}

TEST(MeasureAndSize, EqualsComposition) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> coord(0, 400), scale(0.05, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const SegmentPx s{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}};
        const auto c = Calibration::make(scale(rng));
        ASSERT_EQ(measure_and_size(s, c, catalog()),
                  snap_to_size(geometry::px_to_mm(geometry::distance_px(s), c), catalog()));
    }
}

TEST(MeasureAndSize, ScaleConsistency) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> len(50, 300), scale(0.1, 0.8), factor(0.25, 4.0);
    for (int i = 0; i < 2000; ++i) {
        const double l = len(rng), s = scale(rng), f = factor(rng);
        const auto a = measure_and_size({{0, 0}, {l, 0}}, Calibration::make(s), catalog());
        const auto b = measure_and_size({{0, 0}, {l * f, 0}}, Calibration::make(s / f), catalog());
        ASSERT_NEAR(a.measured_mm, b.measured_mm, 1e-9);
        ASSERT_EQ(a.snapped_size_mm, b.snapped_size_mm);
    }
}

TEST(LookupTemplate, Examples) {
    const auto& spec = lookup_template(catalog(), Side::Left, 58);
    EXPECT_EQ(spec.size_mm, 58);
    EXPECT_EQ(spec.side, Side::Left);
    EXPECT_EQ(spec.brand, "Versys");

    for (auto [side, size] : {std::pair{Side::Right, 57}, std::pair{Side::Left, 34}, std::pair{Side::Left, 82}}) {
        try {
            lookup_template(catalog(), side, size);
            ADD_FAILURE() << size;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NotFound);
        }
    }
}

TEST(Catalog, StandardShape) {
    const auto& c = catalog();
    EXPECT_EQ(c.min_size(), 36);
    EXPECT_EQ(c.max_size(), 80);
    EXPECT_EQ(c.sizes().size(), 23u);
    EXPECT_EQ(c.entries().size(), 46u);
    for (const auto& e : c.entries()) {
        EXPECT_NEAR(geometry::max_vertex_distance(e.outline.vertices()), e.size_mm, 1e-9);
    }
}

TEST(Catalog, ValidationCatchesBrokenCatalogs) {
    auto entry = [](int size, Side side, std::string brand = "B") {
        return ImplantSpec{std::move(brand), side, size, "o", cup_outline(size)};
    };
    auto kinds = [](const std::vector<ImplantSpec>& v) {
        std::vector<CatalogViolation::Kind> out;
        for (const auto& x : validate_entries(v)) out.push_back(x.kind);
        return out;
    };
    using K = CatalogViolation::Kind;
    EXPECT_EQ(kinds({entry(36, Side::Left), entry(36, Side::Right), entry(40, Side::Left), entry(40, Side::Right)}),
              std::vector{K::Contiguity});
    EXPECT_EQ(kinds({entry(36, Side::Left)}), std::vector{K::MissingSide});
    EXPECT_EQ(kinds({entry(37, Side::Left), entry(36, Side::Left), entry(36, Side::Right)}), std::vector{K::Parity});
    EXPECT_EQ(kinds({entry(82, Side::Left), entry(36, Side::Left), entry(36, Side::Right)}), std::vector{K::Range});
    EXPECT_EQ(kinds({entry(36, Side::Left), entry(36, Side::Right, "C")}), std::vector{K::Brand});
    EXPECT_EQ(kinds({entry(36, Side::Left), entry(36, Side::Left), entry(36, Side::Right)}), std::vector{K::Duplicate});

    ImplantSpec wrong_outline{"B", Side::Left, 40, "o", cup_outline(30)};
    EXPECT_EQ(kinds({wrong_outline, entry(40, Side::Right)}), std::vector{K::Outline});
    EXPECT_THROW(ImplantCatalog::make({entry(36, Side::Left)}), Error);
}

}  // namespace
}  // namespace hipplan::sizing
