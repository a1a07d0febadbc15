#include <hipplan/planning.hpp>
#include <hipplan/error.hpp>
#include <hipplan/text.hpp>

#include <array>
#include <map>

namespace hipplan::planning {

using geometry::Calibration;
using geometry::PointPx;
using geometry::RigidTransform;
using geometry::SegmentPx;

Placement default_placement(const SegmentPx& m, const sizing::ImplantSpec& spec,
                            const Calibration&) {
    if (geometry::distance_px(m) == 0.0) {
        throw Error(ErrorCode::InvalidMeasurement, "placement: zero-length measurement");
    }
    const PointPx center = geometry::midpoint(m);
    Placement p;
    p.implant = {spec.brand, spec.side, spec.size_mm};
    p.pose = RigidTransform::rotation(geometry::segment_angle_deg(m), center);
    p.anchor = center;
    return p;
}

Placement default_placement(const SegmentPx& m, const sizing::SizingResult& sizing,
                            const sizing::ImplantCatalog& catalog, sizing::Side side,
                            const Calibration& c) {
    if (!sizing.accepted()) {
        throw Error(ErrorCode::NoPlacement,
                    "placement: sizing was rejected (" +
                        std::string(sizing::to_string(*sizing.rejected_reason)) + ")");
    }
    return default_placement(m, sizing::lookup_template(catalog, side, *sizing.snapped_size_mm), c);
}

Placement adjust_placement(const Placement& p, const RigidTransform& delta) {
    Placement out = p;
    out.pose = geometry::compose(delta, p.pose);
    out.anchor = geometry::apply_transform(delta, p.anchor);
    return out;
}

std::vector<PointPx> render_outline(const Placement& p, const sizing::ImplantSpec& spec,
                                    const Calibration& c) {
    std::vector<PointPx> out;
    out.reserve(spec.outline.size());
    for (const auto& v : spec.outline.vertices()) {
        const PointPx r = geometry::rotate_vector(
            {geometry::mm_to_px(v.x, c), geometry::mm_to_px(v.y, c)}, p.pose.rotation_deg);
        out.push_back({p.anchor.x + r.x, p.anchor.y + r.y});
    }
    return out;
}

std::string_view to_string(Gender g) { return g == Gender::M ? "M" : "F"; }

std::optional<Gender> parse_gender(std::string_view text) {
    if (text == "M") return Gender::M;
    if (text == "F") return Gender::F;
    return std::nullopt;
}

namespace {

void require_text(std::string_view field, const std::string& value) {
    if (value.empty()) {
        throw Error(ErrorCode::Validation, "plan: field '" + std::string(field) + "' is empty");
    }
    if (value.find_first_of("\r\n") != std::string::npos) {
        throw Error(ErrorCode::Validation,
                    "plan: field '" + std::string(field) + "' must be a single line");
    }
}

constexpr std::array<std::string_view, 9> kFields = {
    "patient_name",     "gender",      "patient_id",  "dob",       "acetabular_size",
    "acetabular_brand", "measurement", "calibration", "placement",
};

std::string join_numbers(std::initializer_list<double> values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) out += ' ';
        out += text::format_double(v);
    }
    return out;
}

}  // namespace

void check_consistency(const PlanRecord& r, const sizing::ImplantCatalog& catalog) {
    require_text("patient_name", r.patient_name);
    require_text("patient_id", r.patient_id);
    require_text("dob", r.dob);
    require_text("acetabular_brand", r.acetabular_brand);

    sizing::SizingResult sized;
    try {
        sized = sizing::measure_and_size(r.measurement, r.calibration, catalog);
    } catch (const Error& e) {
        throw Error(ErrorCode::Consistency, std::string("plan: measurement cannot be sized: ") + e.what());
    }
    if (!sized.accepted()) {
        throw Error(ErrorCode::Consistency,
                    "plan: measurement of " + text::format_double(sized.measured_mm) +
                        " mm is rejected (" + std::string(sizing::to_string(*sized.rejected_reason)) +
                        ")");
    }
    if (*sized.snapped_size_mm != r.acetabular_size) {
        throw Error(ErrorCode::Consistency,
                    "plan: acetabular_size " + std::to_string(r.acetabular_size) +
                        " disagrees with measurement, which sizes to " +
                        std::to_string(*sized.snapped_size_mm));
    }
    const auto& implant = r.placement.implant;
    if (implant.size_mm != r.acetabular_size || implant.brand != r.acetabular_brand) {
        throw Error(ErrorCode::Consistency, "plan: placement implant does not match acetabular size/brand");
    }
    if (!catalog.contains(implant.side, implant.size_mm) || catalog.brand() != implant.brand) {
        throw Error(ErrorCode::Consistency, "plan: placement implant is not in the " +
                                                catalog.brand() + " catalog");
    }
}

std::string serialize_plan(const PlanRecord& r) {
    const auto& pose = r.placement.pose;
    const auto& m = r.measurement;
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) {
        out.append(key).append(": ").append(value).append("\n");
    };
    line("patient_name", r.patient_name);
    line("gender", std::string(to_string(r.gender)));
    line("patient_id", r.patient_id);
    line("dob", r.dob);
    line("acetabular_size", std::to_string(r.acetabular_size));
    line("acetabular_brand", r.acetabular_brand);
    line("measurement", join_numbers({m.a.x, m.a.y, m.b.x, m.b.y}));
    line("calibration", text::format_double(r.calibration.mm_per_px()));
    line("placement", std::string(sizing::to_string(r.placement.implant.side)) + " " +
                          std::to_string(r.placement.implant.size_mm) + " " +
                          join_numbers({pose.rotation_deg, pose.pivot.x, pose.pivot.y, pose.dx,
                                        pose.dy, r.placement.anchor.x, r.placement.anchor.y}));
    out += "\n";
    return out;
}

PlanRecord parse_plan(std::string_view input, const std::string& source) {
    struct Value {
        std::string text;
        std::size_t line;
        std::size_t offset;
    };
    std::map<std::string, Value, std::less<>> values;
    bool terminated = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    auto fail = [&](std::size_t line, std::size_t offset, const std::string& what) -> ParseError {
        return ParseError(source, line, "offset " + std::to_string(offset) + ": " + what);
    };

    while (pos < input.size()) {
        ++line_no;
        const std::size_t start = pos;
        const auto nl = input.find('\n', pos);
        if (nl == std::string_view::npos) {
            const std::string partial(input.substr(start));
            const std::string key = partial.substr(0, partial.find(':'));
            for (auto f : kFields) {
                if (f == key) throw fail(line_no, start, "field '" + key + "' is truncated");
            }
            for (auto f : kFields) {
                if (!values.contains(f)) {
                    throw fail(line_no, start, "missing field '" + std::string(f) + "' (file truncated)");
                }
            }
            throw fail(line_no, start, "line is not newline-terminated");
        }
        const std::string_view raw = input.substr(start, nl - start);
        pos = nl + 1;
        if (raw.empty()) {
            terminated = true;
            if (pos != input.size()) {
                throw fail(line_no + 1, pos, "unexpected content after record terminator");
            }
            break;
        }
        const auto colon = raw.find(':');
        if (colon == std::string_view::npos) {
            throw fail(line_no, start, "expected 'key: value'");
        }
        const std::string key(raw.substr(0, colon));
        std::string_view rest = raw.substr(colon + 1);
        if (!rest.empty()) {
            if (rest.front() != ' ') throw fail(line_no, start + colon + 1, "expected ': ' after key");
            rest.remove_prefix(1);
        }
        bool known = false;
        for (auto f : kFields) known = known || f == key;
        if (!known) throw fail(line_no, start, "unknown field '" + key + "'");
        if (values.contains(key)) throw fail(line_no, start, "duplicate field '" + key + "'");
        values.emplace(key, Value{std::string(rest), line_no, start + colon + 2});
    }

    for (auto f : kFields) {
        if (!values.contains(f)) {
            throw fail(line_no + 1, input.size(), "missing field '" + std::string(f) + "'");
        }
    }
    if (!terminated) {
        throw fail(line_no + 1, input.size(), "missing blank line terminating the record");
    }

    auto numbers = [&](std::string_view key, std::size_t expect) {
        const auto& v = values.find(key)->second;
        const auto toks = text::split_ws(v.text);
        std::vector<double> out;
        for (const auto& t : toks) {
            auto d = text::parse_double(t);
            if (!d) throw fail(v.line, v.offset, std::string(key) + ": bad number '" + t + "'");
            out.push_back(*d);
        }
        if (out.size() != expect) {
            throw fail(v.line, v.offset, std::string(key) + ": expected " + std::to_string(expect) +
                                             " numbers, got " + std::to_string(out.size()));
        }
        return out;
    };
    auto text_of = [&](std::string_view key) -> const Value& { return values.find(key)->second; };

    PlanRecord r;
    r.patient_name = text_of("patient_name").text;
    r.patient_id = text_of("patient_id").text;
    r.dob = text_of("dob").text;
    r.acetabular_brand = text_of("acetabular_brand").text;

    const auto& g = text_of("gender");
    auto gender = parse_gender(g.text);
    if (!gender) throw fail(g.line, g.offset, "gender: expected M or F, got '" + g.text + "'");
    r.gender = *gender;

    const auto& sz = text_of("acetabular_size");
    auto size = text::parse_int(sz.text);
    if (!size) throw fail(sz.line, sz.offset, "acetabular_size: expected integer, got '" + sz.text + "'");
    r.acetabular_size = *size;

    const auto m = numbers("measurement", 4);
    r.measurement = {{m[0], m[1]}, {m[2], m[3]}};

    const auto cal = numbers("calibration", 1);
    try {
        r.calibration = Calibration::make(cal[0]);
    } catch (const Error& e) {
        const auto& v = text_of("calibration");
        throw fail(v.line, v.offset, e.what());
    }

    const auto& pl = text_of("placement");
    auto toks = text::split_ws(pl.text);
    if (toks.size() != 9) {
        throw fail(pl.line, pl.offset,
                   "placement: expected 'side size_mm rotation_deg pivot_x pivot_y dx dy anchor_x "
                   "anchor_y', got " + std::to_string(toks.size()) + " fields");
    }
    auto side = sizing::parse_side(toks[0]);
    auto psize = text::parse_int(toks[1]);
    if (!side || !psize) throw fail(pl.line, pl.offset, "placement: bad side or size");
    std::array<double, 7> nums{};
    for (std::size_t i = 0; i < nums.size(); ++i) {
        auto d = text::parse_double(toks[i + 2]);
        if (!d) throw fail(pl.line, pl.offset, "placement: bad number '" + toks[i + 2] + "'");
        nums[i] = *d;
    }
    r.placement.implant = {r.acetabular_brand, *side, *psize};
    r.placement.pose = {nums[0], {nums[1], nums[2]}, nums[3], nums[4]};
    r.placement.anchor = {nums[5], nums[6]};
    return r;
}

}  // namespace hipplan::planning
