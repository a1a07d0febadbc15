/**
 * @file planning.hpp
 * @brief Implant overlay placement and the persisted plan record.
 */
#pragma once

#include <hipplan/geometry.hpp>
#include <hipplan/sizing.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hipplan::planning {

struct ImplantKey {
    std::string brand;
    sizing::Side side = sizing::Side::Left;
    int size_mm = 0;

    friend bool operator==(const ImplantKey&, const ImplantKey&) = default;
};

/// Overlay pose. `anchor` is the cup center in image space and always equals
/// the pose applied to the center of the default placement. `pose.rotation_deg`
/// is the angle of the template diameter axis in the image.
struct Placement {
    ImplantKey implant;
    geometry::RigidTransform pose;
    geometry::PointPx anchor;

    friend bool operator==(const Placement&, const Placement&) = default;
};

/// Centers the template on the midpoint of `m` with its diameter axis along
/// `m`: pose = rotation by the segment angle about the midpoint, no translation.
/// Throws Error(InvalidMeasurement) for a zero-length segment.
Placement default_placement(const geometry::SegmentPx& m, const sizing::ImplantSpec& spec,
                            const geometry::Calibration& c);

/// Looks up the template for an accepted sizing and places it. Throws
/// Error(NoPlacement) when the sizing was rejected.
Placement default_placement(const geometry::SegmentPx& m, const sizing::SizingResult& sizing,
                            const sizing::ImplantCatalog& catalog, sizing::Side side,
                            const geometry::Calibration& c);

/// pose := compose(delta, pose); anchor := delta(anchor). Implant unchanged.
Placement adjust_placement(const Placement& p, const geometry::RigidTransform& delta);

/// Template outline in image pixels: anchor + R(pose) * (v / mm_per_px).
std::vector<geometry::PointPx> render_outline(const Placement& p, const sizing::ImplantSpec& spec,
                                              const geometry::Calibration& c);

enum class Gender { M, F };

std::string_view to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view text);

struct PlanRecord {
    std::string patient_name;
    Gender gender = Gender::F;
    std::string patient_id;
    std::string dob;  // kept verbatim, e.g. "195805"
    int acetabular_size = 0;
    std::string acetabular_brand;
    geometry::SegmentPx measurement;
    geometry::Calibration calibration = geometry::Calibration::make(1.0);
    Placement placement;

    friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

/// Throws Error(Validation) for missing or multi-line text fields and
/// Error(Consistency) when acetabular_size does not follow from the
/// measurement and calibration, or the placement names another implant.
void check_consistency(const PlanRecord& r, const sizing::ImplantCatalog& catalog);

/// Plan file text: `key: value` lines in field order, terminated by a blank
/// line. Geometry numbers use the shortest exact decimal form.
std::string serialize_plan(const PlanRecord& r);

/// Inverse of serialize_plan. Throws ParseError with line and byte offset for
/// malformed lines, and naming the first absent field for truncated input.
PlanRecord parse_plan(std::string_view text, const std::string& source = {});

}  // namespace hipplan::planning
