#include <hipplan/geometry.hpp>
#include <hipplan/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hipplan::geometry {

namespace {

constexpr double kBoundaryTolerancePx = 1e-9;

struct SinCos {
    double s;
    double c;
};

// Exact values at multiples of 90 degrees so axis-aligned edits stay on the pixel grid.
SinCos sincos_deg(double degrees) {
    const double reduced = std::fmod(degrees, 360.0);
    if (reduced == 0.0) return {0.0, 1.0};
    if (reduced == 90.0 || reduced == -270.0) return {1.0, 0.0};
    if (reduced == 180.0 || reduced == -180.0) return {0.0, -1.0};
    if (reduced == 270.0 || reduced == -90.0) return {-1.0, 0.0};
    const double rad = reduced * std::numbers::pi / 180.0;
    return {std::sin(rad), std::cos(rad)};
}

void require_finite(PointPx p, const char* what) {
    if (!is_finite(p)) {
        throw Error(ErrorCode::InvalidGeometry, std::string(what) + ": non-finite coordinate");
    }
}

void require_finite(const RigidTransform& t) {
    if (!std::isfinite(t.rotation_deg) || !std::isfinite(t.dx) || !std::isfinite(t.dy) ||
        !is_finite(t.pivot)) {
        throw Error(ErrorCode::InvalidGeometry, "transform: non-finite parameter");
    }
}

double cross(PointPx o, PointPx a, PointPx b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(PointPx o, PointPx a, PointPx b) {
    const double v = cross(o, a, b);
    return (v > 0.0) - (v < 0.0);
}

bool within_box(PointPx a, PointPx b, PointPx p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(PointPx p1, PointPx p2, PointPx q1, PointPx q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && within_box(p1, p2, q1)) return true;
    if (o2 == 0 && within_box(p1, p2, q2)) return true;
    if (o3 == 0 && within_box(q1, q2, p1)) return true;
    if (o4 == 0 && within_box(q1, q2, p2)) return true;
    return false;
}

double point_segment_distance(PointPx p, PointPx a, PointPx b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

bool on_boundary(PointPx p, std::span<const PointPx> v) {
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (point_segment_distance(p, v[j], v[i]) <= kBoundaryTolerancePx) return true;
    }
    return false;
}

void validate_polygon(std::span<const PointPx> v) {
    if (v.size() < 3) {
        throw Error(ErrorCode::InvalidGeometry, "outline: needs at least 3 vertices, got " +
                                                    std::to_string(v.size()));
    }
    for (const auto& p : v) require_finite(p, "outline");
    if (signed_area(v) == 0.0) {
        throw Error(ErrorCode::InvalidGeometry, "outline: zero area");
    }
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PointPx a = v[i];
        const PointPx b = v[(i + 1) % n];
        if (a == b) {
            throw Error(ErrorCode::InvalidGeometry,
                        "outline: repeated vertex at index " + std::to_string(i));
        }
        // Adjacent edges share one vertex; they may only touch there.
        const PointPx c = v[(i + 2) % n];
        if (orientation(a, b, c) == 0 && ((c.x - b.x) * (a.x - b.x) + (c.y - b.y) * (a.y - b.y)) > 0.0) {
            throw Error(ErrorCode::InvalidGeometry,
                        "outline: edge folds back at vertex " + std::to_string((i + 1) % n));
        }
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(a, b, v[j], v[(j + 1) % n])) {
                throw Error(ErrorCode::InvalidGeometry, "outline: edges " + std::to_string(i) +
                                                            " and " + std::to_string(j) +
                                                            " intersect");
            }
        }
    }
}

}  // namespace

Calibration Calibration::make(double mm_per_px) {
    if (!std::isfinite(mm_per_px) || mm_per_px <= 0.0) {
        throw Error(ErrorCode::Calibration, "calibration: mm_per_px must be finite and > 0");
    }
    return Calibration(mm_per_px);
}

Outline Outline::make(std::vector<PointPx> vertices) {
    validate_polygon(vertices);
    return Outline(std::move(vertices));
}

bool is_finite(PointPx p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

double distance_px(PointPx a, PointPx b) {
    require_finite(a, "distance");
    require_finite(b, "distance");
    return std::hypot(b.x - a.x, b.y - a.y);
}

double distance_px(const SegmentPx& s) { return distance_px(s.a, s.b); }

double px_to_mm(double px, const Calibration& c) { return px * c.mm_per_px(); }

double mm_to_px(double mm, const Calibration& c) { return mm / c.mm_per_px(); }

Calibration calibrate_from_reference(double marker_px, double marker_mm) {
    if (!std::isfinite(marker_px) || marker_px <= 0.0) {
        throw Error(ErrorCode::Calibration, "calibration: marker length in pixels must be > 0");
    }
    if (!std::isfinite(marker_mm) || marker_mm <= 0.0) {
        throw Error(ErrorCode::Calibration, "calibration: marker length in mm must be > 0");
    }
    return Calibration::make(marker_mm / marker_px);
}

PointPx midpoint(const SegmentPx& s) {
    require_finite(s.a, "midpoint");
    require_finite(s.b, "midpoint");
    return {(s.a.x + s.b.x) / 2.0, (s.a.y + s.b.y) / 2.0};
}

double segment_angle_deg(const SegmentPx& s) {
    require_finite(s.a, "angle");
    require_finite(s.b, "angle");
    return std::atan2(s.b.y - s.a.y, s.b.x - s.a.x) * 180.0 / std::numbers::pi;
}

PointPx rotate_vector(PointPx v, double degrees) {
    const auto [s, c] = sincos_deg(degrees);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

PointPx apply_transform(const RigidTransform& t, PointPx p) {
    require_finite(t);
    require_finite(p, "transform");
    const PointPx r = rotate_vector({p.x - t.pivot.x, p.y - t.pivot.y}, t.rotation_deg);
    return {r.x + t.pivot.x + t.dx, r.y + t.pivot.y + t.dy};
}

std::vector<PointPx> apply_transform(const RigidTransform& t, std::span<const PointPx> points) {
    std::vector<PointPx> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(apply_transform(t, p));
    return out;
}

double normalize_degrees(double degrees) {
    double r = std::fmod(degrees + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    return r - 180.0;
}

RigidTransform compose(const RigidTransform& second, const RigidTransform& first) {
    require_finite(second);
    require_finite(first);
    // Keep first's pivot and fold everything else into the translation:
    // t = R2 (c1 + t1 - c2) + c2 + t2 - c1
    const PointPx c1 = first.pivot;
    const PointPx c2 = second.pivot;
    const PointPx r = rotate_vector({c1.x + first.dx - c2.x, c1.y + first.dy - c2.y},
                                    second.rotation_deg);
    RigidTransform out;
    out.rotation_deg = normalize_degrees(first.rotation_deg + second.rotation_deg);
    out.pivot = c1;
    out.dx = r.x + c2.x + second.dx - c1.x;
    out.dy = r.y + c2.y + second.dy - c1.y;
    return out;
}

RigidTransform inverse(const RigidTransform& t) {
    require_finite(t);
    const PointPx back = rotate_vector({t.dx, t.dy}, -t.rotation_deg);
    RigidTransform out;
    out.rotation_deg = normalize_degrees(-t.rotation_deg);
    out.pivot = t.pivot;
    out.dx = -back.x;
    out.dy = -back.y;
    return out;
}

double signed_area(std::span<const PointPx> v) {
    if (v.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        twice += v[j].x * v[i].y - v[i].x * v[j].y;
    }
    return twice / 2.0;
}

double max_vertex_distance(std::span<const PointPx> v) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            best = std::max(best, std::hypot(v[i].x - v[j].x, v[i].y - v[j].y));
        }
    }
    return best;
}

bool hit_test(PointPx p, const Outline& o) {
    require_finite(p, "hit test");
    const auto& v = o.vertices();
    if (on_boundary(p, v)) return true;
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

bool hit_test(PointPx p, std::span<const PointPx> vertices) {
    return hit_test(p, Outline::make({vertices.begin(), vertices.end()}));
}

}  // namespace hipplan::geometry
