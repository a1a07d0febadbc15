#include <hipplan/session.hpp>
#include <hipplan/error.hpp>

namespace hipplan::planning {

std::string_view content_type(ImageFormat f) {
    return f == ImageFormat::Jpeg ? "image/jpeg" : "image/png";
}

std::optional<ImageFormat> detect_image_format(std::string_view bytes) {
    constexpr std::string_view png_magic("\x89PNG\r\n\x1a\n", 8);
    constexpr std::string_view jpeg_magic("\xFF\xD8\xFF", 3);
    if (bytes.starts_with(png_magic)) return ImageFormat::Png;
    if (bytes.starts_with(jpeg_magic)) return ImageFormat::Jpeg;
    return std::nullopt;
}

Session::Session(std::string id, std::string image) : id_(std::move(id)), image_(std::move(image)) {
    if (image_.empty()) throw Error(ErrorCode::Parse, "image: empty body");
    auto fmt = detect_image_format(image_);
    if (!fmt) throw Error(ErrorCode::Parse, "image: expected JPEG or PNG data");
    format_ = *fmt;
}

void Session::set_calibration(const geometry::Calibration& c) {
    calibration_ = c;
    sizing_.reset();
    placement_.reset();
}

const sizing::SizingResult& Session::submit_measurement(const geometry::SegmentPx& s,
                                                        sizing::Side side,
                                                        const sizing::ImplantCatalog& catalog) {
    if (!calibration_) {
        throw Error(ErrorCode::CalibrationMissing, "session: set a calibration before measuring");
    }
    auto result = sizing::measure_and_size(s, *calibration_, catalog);
    std::optional<Placement> placement;
    if (result.accepted()) {
        placement = default_placement(s, result, catalog, side, *calibration_);
    }
    measurement_ = s;
    side_ = side;
    sizing_ = result;
    placement_ = std::move(placement);
    return *sizing_;
}

const Placement& Session::adjust(const geometry::RigidTransform& delta) {
    if (!placement_) {
        throw Error(ErrorCode::State, "session: no implant placed yet; submit an accepted measurement first");
    }
    placement_ = adjust_placement(*placement_, delta);
    return *placement_;
}

PlanRecord Session::build_plan(const PatientInfo& patient) const {
    if (!placement_) {
        throw Error(ErrorCode::State, "session: no implant placed yet; nothing to save");
    }
    PlanRecord r;
    r.patient_name = patient.patient_name;
    r.gender = patient.gender;
    r.patient_id = patient.patient_id;
    r.dob = patient.dob;
    r.acetabular_size = placement_->implant.size_mm;
    r.acetabular_brand = placement_->implant.brand;
    r.measurement = *measurement_;
    r.calibration = *calibration_;
    r.placement = *placement_;
    return r;
}

}  // namespace hipplan::planning
