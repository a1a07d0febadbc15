/**
 * @file geometry.hpp
 * @brief 2D measurement geometry in image pixel space.
 *
 * Frame convention: origin at the top-left pixel, x to the right, y downward.
 * A positive rotation turns clockwise on screen, so rotating (1,0) by 90 degrees
 * about the origin yields (0,1).
 */
#pragma once

#include <span>
#include <vector>

namespace hipplan::geometry {

struct PointPx {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PointPx&, const PointPx&) = default;
};

struct SegmentPx {
    PointPx a;
    PointPx b;

    friend bool operator==(const SegmentPx&, const SegmentPx&) = default;
};

/// Isotropic pixel-to-millimeter scale. Construct through make() or
/// calibrate_from_reference() to get a validated value.
class Calibration {
public:
    /// Throws Error(Calibration) unless mm_per_px is finite and > 0.
    static Calibration make(double mm_per_px);

    double mm_per_px() const noexcept { return mm_per_px_; }

    friend bool operator==(const Calibration&, const Calibration&) = default;

private:
    explicit Calibration(double mm_per_px) : mm_per_px_(mm_per_px) {}
    double mm_per_px_;
};

/// Rotation about a pivot followed by a translation:
///   p' = R(rotation_deg) * (p - pivot) + pivot + (dx, dy)
struct RigidTransform {
    double rotation_deg = 0.0;
    PointPx pivot;
    double dx = 0.0;
    double dy = 0.0;

    static RigidTransform identity() { return {}; }
    static RigidTransform translation(double dx, double dy) { return {0.0, {}, dx, dy}; }
    static RigidTransform rotation(double degrees, PointPx pivot) { return {degrees, pivot, 0.0, 0.0}; }

    friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

/// Simple closed polygon. Construct through make() to get a validated value.
class Outline {
public:
    /// Throws Error(InvalidGeometry) for fewer than 3 vertices, non-finite
    /// coordinates, zero area or self-intersection.
    static Outline make(std::vector<PointPx> vertices);

    const std::vector<PointPx>& vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }

    friend bool operator==(const Outline&, const Outline&) = default;

private:
    explicit Outline(std::vector<PointPx> v) : vertices_(std::move(v)) {}
    std::vector<PointPx> vertices_;
};

bool is_finite(PointPx p) noexcept;

double distance_px(const SegmentPx& s);
double distance_px(PointPx a, PointPx b);

double px_to_mm(double px, const Calibration& c);
double mm_to_px(double mm, const Calibration& c);

/// mm_per_px = marker_mm / marker_px. Both inputs must be finite and > 0.
Calibration calibrate_from_reference(double marker_px, double marker_mm);

PointPx midpoint(const SegmentPx& s);

/// Direction of a -> b in degrees, in (-180, 180], using the frame's rotation sense.
double segment_angle_deg(const SegmentPx& s);

/// Rotates v about the origin. Quarter turns are exact.
PointPx rotate_vector(PointPx v, double degrees);

PointPx apply_transform(const RigidTransform& t, PointPx p);
std::vector<PointPx> apply_transform(const RigidTransform& t, std::span<const PointPx> points);

/// Transform equivalent to applying `second` after `first`:
/// apply(compose(second, first), p) == apply(second, apply(first, p)).
RigidTransform compose(const RigidTransform& second, const RigidTransform& first);

RigidTransform inverse(const RigidTransform& t);

/// Wraps an angle in degrees into [-180, 180).
double normalize_degrees(double degrees);

/// Signed shoelace area; positive when vertices run counterclockwise in a y-up frame.
double signed_area(std::span<const PointPx> vertices);

/// Largest distance between any two vertices.
double max_vertex_distance(std::span<const PointPx> vertices);

/// Point-in-polygon by ray casting. Points on the boundary count as inside.
bool hit_test(PointPx p, const Outline& o);

/// Same test on raw vertices; validates them as an Outline first.
bool hit_test(PointPx p, std::span<const PointPx> vertices);

}  // namespace hipplan::geometry
