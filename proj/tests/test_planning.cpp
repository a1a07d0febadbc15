#include <hipplan/error.hpp>
#include <hipplan/plan_store.hpp>
#include <hipplan/planning.hpp>
#include <hipplan/session.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "test_support.hpp"

namespace hipplan::planning {
namespace {

using geometry::Calibration;
using geometry::PointPx;
using geometry::RigidTransform;
using geometry::SegmentPx;
using sizing::Side;

std::shared_ptr<const sizing::ImplantCatalog> catalog() {
    static const auto c =
        std::make_shared<const sizing::ImplantCatalog>(sizing::ImplantCatalog::standard("Versys"));
    return c;
}

const Calibration kHalf = Calibration::make(0.5);
const SegmentPx kDiameter{{0, 0}, {116.56, 0}};

double gap(PointPx a, PointPx b) { return std::hypot(a.x - b.x, a.y - b.y); }

PlanRecord sample_record() {
    const auto& spec = catalog()->at(Side::Left, 58);
    PlanRecord r;
    r.patient_name = "JEY";
    r.gender = Gender::F;
    r.patient_id = "N089682.2008";
    r.dob = "195805";
    r.acetabular_size = 58;
    r.acetabular_brand = "Versys";
    r.measurement = kDiameter;
    r.calibration = kHalf;
    r.placement = default_placement(kDiameter, spec, kHalf);
    return r;
}

// =============================================================================
// placement
// =============================================================================

TEST(DefaultPlacement, Examples) {
    const auto& spec = catalog()->at(Side::Left, 50);
    const auto h = default_placement({{0, 0}, {100, 0}}, spec, kHalf);
    EXPECT_EQ(h.anchor, (PointPx{50, 0}));
    EXPECT_DOUBLE_EQ(h.pose.rotation_deg, 0.0);
    EXPECT_EQ(h.implant, (ImplantKey{"Versys", Side::Left, 50}));

    const auto v = default_placement({{0, 0}, {0, 100}}, spec, kHalf);
    EXPECT_EQ(v.anchor, (PointPx{0, 50}));
    EXPECT_DOUBLE_EQ(v.pose.rotation_deg, 90.0);

    const auto d = default_placement({{10, 10}, {110, 60}}, spec, kHalf);
    EXPECT_EQ(d.anchor, (PointPx{60, 35}));
    EXPECT_NEAR(d.pose.rotation_deg, 26.56505117707799, 1e-12);
    EXPECT_EQ(d.pose.dx, 0.0);
    EXPECT_EQ(d.pose.dy, 0.0);
}

TEST(DefaultPlacement, RejectedSizingHasNoPlacement) {
    const auto rejected = sizing::snap_to_size(30.0, *catalog());
    try {
        default_placement({{0, 0}, {60, 0}}, rejected, *catalog(), Side::Left, kHalf);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoPlacement);
    }
}

TEST(DefaultPlacement, OutlineDiameterLiesOnMeasurement) {
    // The rendered template's diameter endpoints coincide with the drawn line.
    const SegmentPx m{{10, 10}, {110, 60}};
    const Calibration c = Calibration::make(58.0 / geometry::distance_px(m));
    const auto sized = sizing::measure_and_size(m, c, *catalog());
    ASSERT_EQ(sized.snapped_size_mm, 58);
    const auto p = default_placement(m, sized, *catalog(), Side::Left, c);
    const auto outline = render_outline(p, catalog()->at(Side::Left, 58), c);
    EXPECT_LT(gap(outline.front(), m.b), 1e-9);
    EXPECT_LT(gap(outline.back(), m.a), 1e-9);
}

TEST(AdjustPlacement, IdentityLeavesPlacementUnchanged) {
    const auto p = sample_record().placement;
    const auto q = adjust_placement(p, RigidTransform::identity());
    EXPECT_EQ(q.implant, p.implant);
    EXPECT_EQ(q.anchor, p.anchor);
    EXPECT_DOUBLE_EQ(q.pose.rotation_deg, p.pose.rotation_deg);
    EXPECT_DOUBLE_EQ(q.pose.dx, p.pose.dx);
    EXPECT_DOUBLE_EQ(q.pose.dy, p.pose.dy);
}

TEST(AdjustPlacement, TranslationsAccumulate) {
    const auto p = sample_record().placement;
    const auto step = RigidTransform::translation(5, -3);
    const auto q = adjust_placement(adjust_placement(p, step), step);
    EXPECT_DOUBLE_EQ(q.pose.dx, 10.0);
    EXPECT_DOUBLE_EQ(q.pose.dy, -6.0);
    EXPECT_EQ(q.anchor, (PointPx{p.anchor.x + 10, p.anchor.y - 6}));
}

TEST(AdjustPlacement, SixFifteenDegreeStepsMatchQuarterTurn) {
    const auto& spec = catalog()->at(Side::Left, 58);
    auto stepped = default_placement({{10, 10}, {110, 60}}, spec, kHalf);
    const auto start = stepped;
    for (int i = 0; i < 6; ++i) stepped = adjust_placement(stepped, RigidTransform::rotation(15, stepped.anchor));
    const auto once = adjust_placement(start, RigidTransform::rotation(90, start.anchor));

    const auto a = render_outline(stepped, spec, kHalf);
    const auto b = render_outline(once, spec, kHalf);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(gap(a[i], b[i]), 1e-6);

    // and the oracle: rotating the starting outline by 90 degrees about its anchor
    const auto m = oracle::matrix_of(90, start.anchor, 0, 0);
    const auto base = render_outline(start, spec, kHalf);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(gap(a[i], oracle::apply(m, base[i])), 1e-6);
}

TEST(AdjustPlacement, PreservesImplantAndOutlineSpan) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> angle(-180, 180), coord(-200, 200);
    const auto& spec = catalog()->at(Side::Right, 66);
    auto p = default_placement({{100, 100}, {232, 120}}, spec, kHalf);
    const double span = geometry::max_vertex_distance(render_outline(p, spec, kHalf));
    for (int i = 0; i < 500; ++i) {
        p = adjust_placement(p, {angle(rng), {coord(rng), coord(rng)}, coord(rng), coord(rng)});
        ASSERT_EQ(p.implant, (ImplantKey{"Versys", Side::Right, 66}));
        ASSERT_NEAR(geometry::max_vertex_distance(render_outline(p, spec, kHalf)), span, 1e-6);
    }
}

TEST(AdjustPlacement, AnchorTracksPose) {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> angle(-180, 180), coord(-200, 200);
    const auto start = sample_record().placement;
    auto p = start;
    for (int i = 0; i < 200; ++i) {
        p = adjust_placement(p, {angle(rng), {coord(rng), coord(rng)}, coord(rng), coord(rng)});
        // the pose measured from the default pose moves the default center onto the anchor
        const auto relative = geometry::compose(p.pose, geometry::inverse(start.pose));
        ASSERT_LT(gap(geometry::apply_transform(relative, start.anchor), p.anchor), 1e-6);
    }
}

// =============================================================================
// plan record text
// =============================================================================

TEST(PlanText, GoldenSampleRecord) {
    const auto r = sample_record();
    EXPECT_EQ(serialize_plan(r), test_support::read_file(test_support::fixture("sample.plan")));
    EXPECT_EQ(parse_plan(serialize_plan(r)), r);
}

TEST(PlanText, RoundTripsAwkwardText) {
    auto r = sample_record();
    r.patient_name = "  Mary-Jane O'Neil, Jr.: #2  ";
    r.patient_id = "N089682.2008/ward 7";
    r.dob = "1958-05 (approx)";
    r.gender = Gender::M;
    const auto text = serialize_plan(r);
    EXPECT_EQ(parse_plan(text), r);
    EXPECT_EQ(serialize_plan(parse_plan(text)), text);
}

TEST(PlanText, RoundTripsArbitraryDoubles) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> coord(-1000, 1000);
    auto r = sample_record();
    for (int i = 0; i < 200; ++i) {
        r.placement = adjust_placement(r.placement, {coord(rng) / 7, {coord(rng), coord(rng)}, coord(rng), coord(rng)});
        const auto text = serialize_plan(r);
        ASSERT_EQ(parse_plan(text), r);
        ASSERT_EQ(serialize_plan(parse_plan(text)), text);
    }
}

std::string parse_error_of(const std::string& text) {
    try {
        parse_plan(text, "x.plan");
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

TEST(PlanText, TruncationNamesMissingField) {
    const std::string full = serialize_plan(sample_record());
    // cut after the calibration line
    const auto cut = full.find("placement:");
    EXPECT_NE(parse_error_of(full.substr(0, cut)).find("missing field 'placement'"), std::string::npos);
    // cut inside the placement line
    EXPECT_NE(parse_error_of(full.substr(0, cut + 14)).find("field 'placement' is truncated"), std::string::npos);
    // cut inside the gender key
    EXPECT_NE(parse_error_of(full.substr(0, full.find("gender") + 3)).find("missing field 'gender'"), std::string::npos);
    // everything but the terminator
    EXPECT_NE(parse_error_of(full.substr(0, full.size() - 1)).find("terminating"), std::string::npos);
    EXPECT_NE(parse_error_of("").find("missing field 'patient_name'"), std::string::npos);
}

TEST(PlanText, CorruptLinesReportOffset) {
    std::string text = serialize_plan(sample_record());
    const auto at = text.find("calibration: 0.5");
    std::string bad = text;
    bad.replace(at, 16, "calibration: zero");
    const auto msg = parse_error_of(bad);
    EXPECT_NE(msg.find("line 8"), std::string::npos) << msg;
    EXPECT_NE(msg.find("offset " + std::to_string(at + 13)), std::string::npos) << msg;

    EXPECT_NE(parse_error_of("nonsense\n").find("expected 'key: value'"), std::string::npos);
    EXPECT_NE(parse_error_of("colour: red\n").find("unknown field"), std::string::npos);
    std::string dup = text;
    dup.insert(0, "dob: 1\n");
    EXPECT_NE(parse_error_of(dup).find("duplicate field 'dob'"), std::string::npos);
    std::string gender = text;
    gender.replace(gender.find("gender: F"), 9, "gender: X");
    EXPECT_NE(parse_error_of(gender).find("gender"), std::string::npos);
}

TEST(PlanConsistency, SizeMustFollowMeasurement) {
    auto r = sample_record();
    EXPECT_NO_THROW(check_consistency(r, *catalog()));
    r.acetabular_size = 56;
    r.placement.implant.size_mm = 56;
    try {
        check_consistency(r, *catalog());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Consistency);
    }
}

TEST(PlanConsistency, PlacementMustMatchRecord) {
    auto r = sample_record();
    r.placement.implant.size_mm = 60;
    EXPECT_THROW(check_consistency(r, *catalog()), Error);
    r = sample_record();
    r.acetabular_brand = "Trilogy";
    EXPECT_THROW(check_consistency(r, *catalog()), Error);
    r = sample_record();
    r.measurement = {{0, 0}, {40, 0}};  // 20 mm: rejected below range
    EXPECT_THROW(check_consistency(r, *catalog()), Error);
}

TEST(PlanConsistency, TextFieldsRequired) {
    auto r = sample_record();
    r.patient_name.clear();
    try {
        check_consistency(r, *catalog());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Validation);
    }
    r = sample_record();
    r.dob = "1958\n05";
    EXPECT_THROW(check_consistency(r, *catalog()), Error);
}

// =============================================================================
// plan store
// =============================================================================

class Store : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = test_support::fresh_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        store_ = std::make_unique<PlanStore>(dir_, catalog(), [] {
            return std::chrono::system_clock::time_point(std::chrono::seconds(1760000000));
        });
    }
    std::filesystem::path dir_;
    std::unique_ptr<PlanStore> store_;
};

TEST_F(Store, SaveLoadSaveIsByteIdentical) {
    const auto r = sample_record();
    const auto id = store_->save(r);
    EXPECT_EQ(id, "N089682.2008-20251009T085320Z");
    const auto first = test_support::read_file(store_->path_for(id));
    EXPECT_EQ(first, test_support::read_file(test_support::fixture("sample.plan")));

    const auto loaded = store_->load(id);
    EXPECT_EQ(loaded, r);
    const auto id2 = store_->save(loaded, {.id = id, .overwrite = true});
    EXPECT_EQ(id2, id);
    EXPECT_EQ(test_support::read_file(store_->path_for(id)), first);
}

TEST_F(Store, GeneratedIdsDoNotCollide) {
    const auto r = sample_record();
    const auto a = store_->save(r);
    const auto b = store_->save(r);
    EXPECT_NE(a, b);
    EXPECT_EQ(b, a + "-2");
}

TEST_F(Store, OverwriteNeedsFlag) {
    const auto r = sample_record();
    store_->save(r, {.id = "plan-1"});
    try {
        store_->save(r, {.id = "plan-1"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::State);
    }
    EXPECT_NO_THROW(store_->save(r, {.id = "plan-1", .overwrite = true}));
}

TEST_F(Store, RejectsInconsistentRecord) {
    auto r = sample_record();
    r.acetabular_size = 60;
    r.placement.implant.size_mm = 60;
    try {
        store_->save(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Consistency);
    }
    EXPECT_TRUE(std::filesystem::is_empty(dir_));
}

TEST_F(Store, UnknownAndHostileIds) {
    for (const std::string id : {"missing", "../etc/passwd", ".hidden", ""}) {
        try {
            store_->load(id);
            ADD_FAILURE() << id;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NotFound) << id;
        }
    }
    EXPECT_THROW(store_->save(sample_record(), {.id = "../x"}), Error);
    EXPECT_EQ(PlanStore::sanitize("N089682.2008/ward 7"), "N089682.2008_ward_7");
    EXPECT_EQ(PlanStore::sanitize("..x"), "_.x");
    EXPECT_TRUE(PlanStore::valid_id(PlanStore::sanitize("..x")));
}

TEST_F(Store, CorruptFileIsParseError) {
    const auto id = store_->save(sample_record());
    auto body = test_support::read_file(store_->path_for(id));
    test_support::write_file(store_->path_for(id), body.substr(0, body.find("calibration")));
    try {
        store_->load(id);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("missing field 'calibration'"), std::string::npos);
    }
}

TEST_F(Store, ConcurrentSavesToDistinctIds) {
    const auto r = sample_record();
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 10; ++i) store_->save(r, {.id = "p" + std::to_string(t) + "-" + std::to_string(i)});
        });
    }
    for (auto& th : threads) th.join();
    for (int t = 0; t < 8; ++t)
        for (int i = 0; i < 10; ++i) EXPECT_EQ(store_->load("p" + std::to_string(t) + "-" + std::to_string(i)), r);
}

TEST_F(Store, ConcurrentAutoIdsStayUnique) {
    const auto r = sample_record();
    std::vector<std::string> ids(16);
    std::vector<std::thread> threads;
    for (int t = 0; t < 16; ++t) threads.emplace_back([&, t] { ids[static_cast<std::size_t>(t)] = store_->save(r); });
    for (auto& th : threads) th.join();
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(std::unique(ids.begin(), ids.end()), ids.end());
}

// =============================================================================
// session state machine
// =============================================================================

std::string png_bytes() { return test_support::read_file(test_support::fixture("synthetic_pelvis.png")); }

TEST(SessionState, ImageFormats) {
    EXPECT_EQ(Session("a", png_bytes()).image_format(), ImageFormat::Png);
    EXPECT_EQ(Session("b", test_support::read_file(test_support::fixture("synthetic_pelvis.jpg"))).image_format(),
              ImageFormat::Jpeg);
    for (const auto& bad : {std::string(), std::string("GIF89a....")}) {
        try {
            Session("c", bad);
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::Parse);
        }
    }
}

TEST(SessionState, MeasurementNeedsCalibration) {
    Session s("s", png_bytes());
    try {
        s.submit_measurement(kDiameter, Side::Left, *catalog());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CalibrationMissing);
    }
    EXPECT_FALSE(s.measurement());
}

TEST(SessionState, AdjustBeforeMeasurementIsStateError) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    try {
        s.adjust(RigidTransform::translation(1, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::State);
    }
    EXPECT_THROW(s.build_plan({"JEY", Gender::F, "N089682.2008", "195805"}), Error);
}

TEST(SessionState, FullWalk) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    const auto& sized = s.submit_measurement(kDiameter, Side::Left, *catalog());
    EXPECT_EQ(sized.snapped_size_mm, 58);
    ASSERT_TRUE(s.placement());
    s.adjust(RigidTransform::rotation(12, s.placement()->anchor));
    s.adjust(RigidTransform::translation(4, -2));
    const auto plan = s.build_plan({"JEY", Gender::F, "N089682.2008", "195805"});
    EXPECT_EQ(plan.acetabular_size, 58);
    EXPECT_EQ(plan.acetabular_brand, "Versys");
    EXPECT_NO_THROW(check_consistency(plan, *catalog()));
}

TEST(SessionState, RejectedMeasurementClearsPlacement) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    s.submit_measurement(kDiameter, Side::Left, *catalog());
    ASSERT_TRUE(s.placement());
    const auto& r = s.submit_measurement({{0, 0}, {60, 0}}, Side::Left, *catalog());  // 30 mm
    EXPECT_EQ(r.rejected_reason, sizing::RejectReason::BelowMin);
    EXPECT_TRUE(s.sizing());
    EXPECT_FALSE(s.placement());
}

TEST(SessionState, RecalibrationInvalidatesSizingAndPlacement) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    s.submit_measurement(kDiameter, Side::Left, *catalog());
    s.adjust(RigidTransform::translation(3, 3));
    s.set_calibration(Calibration::make(0.4));
    EXPECT_FALSE(s.sizing());
    EXPECT_FALSE(s.placement());
    EXPECT_TRUE(s.measurement());
}

TEST(SessionState, RemeasureResetsPlacementToDefault) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    s.submit_measurement(kDiameter, Side::Left, *catalog());
    s.adjust(RigidTransform::translation(30, 30));
    s.submit_measurement({{0, 0}, {130, 0}}, Side::Right, *catalog());
    ASSERT_TRUE(s.placement());
    EXPECT_EQ(s.placement()->implant, (ImplantKey{"Versys", Side::Right, 64}));
    EXPECT_EQ(s.placement()->anchor, (PointPx{65, 0}));
}

TEST(SessionState, InvalidMeasurementLeavesStateUntouched) {
    Session s("s", png_bytes());
    s.set_calibration(kHalf);
    s.submit_measurement(kDiameter, Side::Left, *catalog());
    const auto before = *s.placement();
    EXPECT_THROW(s.submit_measurement({{5, 5}, {5, 5}}, Side::Left, *catalog()), Error);
    EXPECT_EQ(*s.placement(), before);
    EXPECT_EQ(*s.measurement(), kDiameter);
}

}  // namespace
}  // namespace hipplan::planning
