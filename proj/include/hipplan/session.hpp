/**
 * @file session.hpp
 * @brief One planner's templating session over a single radiograph.
 *
 * State rules:
 *   - sizing exists only when a measurement and a calibration exist;
 *   - a placement exists only when the sizing was accepted;
 *   - setting a calibration clears sizing and placement;
 *   - submitting a measurement replaces sizing and recomputes the placement.
 * Out-of-order calls are rejected, never reordered.
 */
#pragma once

#include <hipplan/planning.hpp>
#include <hipplan/sizing.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hipplan::planning {

enum class ImageFormat { Jpeg, Png };

std::string_view content_type(ImageFormat f);

/// Sniffs the magic bytes. nullopt for anything but JPEG or PNG.
std::optional<ImageFormat> detect_image_format(std::string_view bytes);

struct PatientInfo {
    std::string patient_name;
    Gender gender = Gender::F;
    std::string patient_id;
    std::string dob;
};

class Session {
public:
    /// Throws Error(Parse) when `image` is empty or not JPEG/PNG.
    Session(std::string id, std::string image);

    const std::string& id() const noexcept { return id_; }
    const std::string& image() const noexcept { return image_; }
    ImageFormat image_format() const noexcept { return format_; }

    const std::optional<geometry::Calibration>& calibration() const noexcept { return calibration_; }
    const std::optional<geometry::SegmentPx>& measurement() const noexcept { return measurement_; }
    const std::optional<sizing::SizingResult>& sizing() const noexcept { return sizing_; }
    const std::optional<Placement>& placement() const noexcept { return placement_; }
    sizing::Side side() const noexcept { return side_; }

    void set_calibration(const geometry::Calibration& c);

    /// Errors: CalibrationMissing without a calibration; InvalidMeasurement
    /// for zero-length or non-finite segments (state left untouched).
    /// A rejected sizing is returned, not thrown; it clears the placement.
    const sizing::SizingResult& submit_measurement(const geometry::SegmentPx& s, sizing::Side side,
                                                   const sizing::ImplantCatalog& catalog);

    /// Error State without a placement.
    const Placement& adjust(const geometry::RigidTransform& delta);

    /// Assembles the plan record for the current placement. Error State
    /// without a placement.
    PlanRecord build_plan(const PatientInfo& patient) const;

private:
    std::string id_;
    std::string image_;
    ImageFormat format_;
    std::optional<geometry::Calibration> calibration_;
    std::optional<geometry::SegmentPx> measurement_;
    std::optional<sizing::SizingResult> sizing_;
    std::optional<Placement> placement_;
    sizing::Side side_ = sizing::Side::Left;
};

}  // namespace hipplan::planning
