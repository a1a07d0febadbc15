#include <hipplan/service.hpp>

#include <httplib.h>
#include <json.hpp>

#include <fmt/format.h>

#include <cmath>
#include <mutex>
#include <random>
#include <vector>

namespace hipplan::service {

using json = nlohmann::json;
using geometry::PointPx;
using geometry::RigidTransform;
using geometry::SegmentPx;

std::string_view to_string(ApiErrorCode code) {
    switch (code) {
        case ApiErrorCode::InvalidMeasurement: return "invalid_measurement";
        case ApiErrorCode::CalibrationMissing: return "calibration_missing";
        case ApiErrorCode::SizeOutOfRange: return "size_out_of_range";
        case ApiErrorCode::NotFound: return "not_found";
        case ApiErrorCode::StateError: return "state_error";
        case ApiErrorCode::ParseError: return "parse_error";
        case ApiErrorCode::IoError: return "io_error";
    }
    return "io_error";
}

ApiError to_api_error(const Error& e) {
    using A = ApiErrorCode;
    switch (e.code()) {
        case ErrorCode::InvalidGeometry:
        case ErrorCode::InvalidMeasurement: return {A::InvalidMeasurement, 422, e.what(), {}};
        case ErrorCode::SizeOutOfRange: return {A::SizeOutOfRange, 422, e.what(), {}};
        case ErrorCode::CalibrationMissing: return {A::CalibrationMissing, 409, e.what(), {}};
        case ErrorCode::NotFound: return {A::NotFound, 404, e.what(), {}};
        case ErrorCode::NoPlacement:
        case ErrorCode::State: return {A::StateError, 409, e.what(), {}};
        case ErrorCode::Consistency: return {A::StateError, 409, e.what(), "consistency"};
        case ErrorCode::Calibration:
        case ErrorCode::Validation:
        case ErrorCode::EmptyDataset:
        case ErrorCode::Parse: return {A::ParseError, 400, e.what(), {}};
        case ErrorCode::Io: return {A::IoError, 500, e.what(), {}};
    }
    return {A::IoError, 500, e.what(), {}};
}

namespace {

ApiResponse respond(int status, const json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error_response(const ApiError& err, json detail = json::object()) {
    if (err.reason) detail["reason"] = *err.reason;
    json body = {{"code", to_string(err.code)}, {"message", err.message}};
    if (!detail.empty()) body["detail"] = std::move(detail);
    return respond(err.status, body);
}

[[noreturn]] void bad_request(const std::string& message) { throw Error(ErrorCode::Parse, message); }

json parse_body(std::string_view body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_request("request body must be a JSON object");
    return j;
}

double number_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) bad_request(std::string("'") + key + "' must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) bad_request(std::string("'") + key + "' must be finite");
    return v;
}

double number_field_or(const json& obj, const char* key, double fallback) {
    return obj.contains(key) ? number_field(obj, key) : fallback;
}

std::string text_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) bad_request(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
}

json point_json(PointPx p) { return {{"x", p.x}, {"y", p.y}}; }

double display_mm(double mm) { return std::round(mm * 100.0) / 100.0; }

json sizing_json(const sizing::SizingResult& s) {
    json j = {{"measured_mm", display_mm(s.measured_mm)}, {"accepted", s.accepted()}};
    j["size_mm"] = s.snapped_size_mm ? json(*s.snapped_size_mm) : json(nullptr);
    j["rejected_reason"] =
        s.rejected_reason ? json(sizing::to_string(*s.rejected_reason)) : json(nullptr);
    return j;
}

json placement_json(const planning::Placement& p, const sizing::ImplantCatalog& catalog,
                    const geometry::Calibration& c) {
    json outline = json::array();
    if (catalog.contains(p.implant.side, p.implant.size_mm)) {
        const auto& spec = catalog.at(p.implant.side, p.implant.size_mm);
        for (const auto& v : planning::render_outline(p, spec, c)) outline.push_back({v.x, v.y});
    }
    return {
        {"implant",
         {{"brand", p.implant.brand},
          {"side", sizing::to_string(p.implant.side)},
          {"size_mm", p.implant.size_mm}}},
        {"pose",
         {{"rotation_deg", p.pose.rotation_deg},
          {"pivot", point_json(p.pose.pivot)},
          {"dx", p.pose.dx},
          {"dy", p.pose.dy}}},
        {"anchor", point_json(p.anchor)},
        {"outline", std::move(outline)},
    };
}

json measurement_json(const SegmentPx& s) {
    return {{"ax", s.a.x}, {"ay", s.a.y}, {"bx", s.b.x}, {"by", s.b.y}};
}

json plan_json(const planning::PlanRecord& r, const sizing::ImplantCatalog& catalog) {
    return {
        {"patient_name", r.patient_name},
        {"gender", planning::to_string(r.gender)},
        {"patient_id", r.patient_id},
        {"dob", r.dob},
        {"acetabular_size", r.acetabular_size},
        {"acetabular_brand", r.acetabular_brand},
        {"measurement", measurement_json(r.measurement)},
        {"calibration", {{"mm_per_px", r.calibration.mm_per_px()}}},
        {"placement", placement_json(r.placement, catalog, r.calibration)},
    };
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        auto end = path.find('/', i);
        if (end == std::string_view::npos) end = path.size();
        parts.emplace_back(path.substr(i, end - i));
        i = end;
    }
    return parts;
}

}  // namespace

std::string random_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_int_distribution<std::uint64_t> dist;
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(dist(rng)),
                  static_cast<unsigned long long>(dist(rng)));
    return buf;
}

Api::Api(std::shared_ptr<const sizing::ImplantCatalog> catalog,
         std::shared_ptr<planning::PlanStore> store, IdGenerator next_id)
    : catalog_(std::move(catalog)),
      store_(std::move(store)),
      next_id_(next_id ? std::move(next_id) : IdGenerator(random_session_id)) {}

std::size_t Api::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<Api::Slot> Api::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
    return it->second;
}

ApiResponse Api::handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
        const auto parts = split_path(path);
        const auto n = parts.size();
        if (n >= 1 && parts[0] == "sessions") {
            if (n == 1 && method == "POST") return create_session(body);
            if (n == 2 && method == "GET") return get_session(parts[1]);
            if (n == 3 && method == "GET" && parts[2] == "image") return get_image(parts[1]);
            if (n == 3 && method == "PUT" && parts[2] == "calibration") return put_calibration(parts[1], body);
            if (n == 3 && method == "PUT" && parts[2] == "measurement") return put_measurement(parts[1], body);
            if (n == 3 && method == "PUT" && parts[2] == "placement") return put_placement(parts[1], body);
            if (n == 3 && method == "POST" && parts[2] == "plan") return post_plan(parts[1], body);
        }
        if (n == 2 && parts[0] == "plans" && method == "GET") return get_plan(parts[1]);
        return error_response({ApiErrorCode::NotFound, 404,
                               "no route for " + std::string(method) + " " + std::string(path), {}});
    } catch (const Error& e) {
        return error_response(to_api_error(e));
    } catch (const std::exception& e) {
        return error_response({ApiErrorCode::IoError, 500, e.what(), {}});
    }
}

ApiResponse Api::create_session(std::string_view body) {
    planning::Session session(next_id_(), std::string(body));
    const std::string id = session.id();
    const auto fmt = session.image_format();
    {
        std::unique_lock lock(sessions_mutex_);
        if (sessions_.contains(id)) throw Error(ErrorCode::State, "session id collision");
        sessions_.emplace(id, std::make_shared<Slot>(std::move(session)));
    }
    return respond(201, {{"session_id", id}, {"content_type", planning::content_type(fmt)}});
}

ApiResponse Api::get_session(const std::string& id) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mutex);
    const auto& s = slot->session;
    json j = {
        {"session_id", s.id()},
        {"image", {{"content_type", planning::content_type(s.image_format())}, {"bytes", s.image().size()}}},
        {"side", sizing::to_string(s.side())},
    };
    j["calibration"] = s.calibration() ? json{{"mm_per_px", s.calibration()->mm_per_px()}} : json(nullptr);
    j["measurement"] = s.measurement() ? measurement_json(*s.measurement()) : json(nullptr);
    j["sizing"] = s.sizing() ? sizing_json(*s.sizing()) : json(nullptr);
    j["placement"] = s.placement() ? placement_json(*s.placement(), *catalog_, *s.calibration())
                                   : json(nullptr);
    return respond(200, j);
}

ApiResponse Api::get_image(const std::string& id) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mutex);
    return {200, std::string(planning::content_type(slot->session.image_format())),
            slot->session.image()};
}

namespace {
std::unique_lock<std::shared_mutex> write_lock(std::shared_mutex& m, const std::string& id) {
    std::unique_lock lock(m, std::try_to_lock);
    if (!lock.owns_lock()) {
        throw Error(ErrorCode::State, "session '" + id + "' is being modified by another request");
    }
    return lock;
}
}  // namespace

ApiResponse Api::put_calibration(const std::string& id, std::string_view body) {
    auto slot = find(id);
    const json j = parse_body(body);
    const auto c = geometry::Calibration::make(number_field(j, "mm_per_px"));
    auto lock = write_lock(slot->mutex, id);
    slot->session.set_calibration(c);
    return respond(200, {{"calibration", {{"mm_per_px", c.mm_per_px()}}}});
}

ApiResponse Api::put_measurement(const std::string& id, std::string_view body) {
    auto slot = find(id);
    const json j = parse_body(body);
    const SegmentPx s{{number_field(j, "ax"), number_field(j, "ay")},
                      {number_field(j, "bx"), number_field(j, "by")}};
    auto side = sizing::Side::Left;
    if (j.contains("side")) {
        auto parsed = sizing::parse_side(text_field(j, "side"));
        if (!parsed) bad_request("'side' must be \"left\" or \"right\"");
        side = *parsed;
    }
    auto lock = write_lock(slot->mutex, id);
    const auto& result = slot->session.submit_measurement(s, side, *catalog_);
    if (!result.accepted()) {
        const std::string reason(sizing::to_string(*result.rejected_reason));
        return error_response(
            {ApiErrorCode::SizeOutOfRange, 422,
             fmt::format("measured diameter {:.2f} mm sizes outside the {}-{} mm catalog range",
                         result.measured_mm, catalog_->min_size(), catalog_->max_size()),
             {}},
            {{"rejected_reason", reason}, {"measured_mm", display_mm(result.measured_mm)}});
    }
    json out = sizing_json(result);
    out["placement"] = placement_json(*slot->session.placement(), *catalog_, *slot->session.calibration());
    return respond(200, out);
}

ApiResponse Api::put_placement(const std::string& id, std::string_view body) {
    auto slot = find(id);
    const json j = parse_body(body);
    auto it = j.find("delta");
    if (it == j.end() || !it->is_object()) bad_request("'delta' must be an object");
    const json& d = *it;
    auto lock = write_lock(slot->mutex, id);
    const auto& current = slot->session.placement();
    if (!current) throw Error(ErrorCode::State, "session: no implant placed yet; submit an accepted measurement first");
    RigidTransform delta;
    delta.rotation_deg = number_field_or(d, "rotation_deg", 0.0);
    delta.dx = number_field_or(d, "dx", 0.0);
    delta.dy = number_field_or(d, "dy", 0.0);
    delta.pivot = current->anchor;
    if (d.contains("pivot")) {
        const json& p = d["pivot"];
        if (!p.is_object()) bad_request("'pivot' must be an object with x and y");
        delta.pivot = {number_field(p, "x"), number_field(p, "y")};
    }
    const auto& placed = slot->session.adjust(delta);
    return respond(200, placement_json(placed, *catalog_, *slot->session.calibration()));
}

ApiResponse Api::post_plan(const std::string& id, std::string_view body) {
    auto slot = find(id);
    const json j = parse_body(body);
    planning::PatientInfo patient;
    patient.patient_name = text_field(j, "patient_name");
    patient.patient_id = text_field(j, "patient_id");
    patient.dob = text_field(j, "dob");
    auto gender = planning::parse_gender(text_field(j, "gender"));
    if (!gender) bad_request("'gender' must be \"M\" or \"F\"");
    patient.gender = *gender;
    planning::SaveOptions options;
    if (j.contains("plan_id")) options.id = text_field(j, "plan_id");
    if (j.contains("overwrite")) {
        if (!j["overwrite"].is_boolean()) bad_request("'overwrite' must be a boolean");
        options.overwrite = j["overwrite"].get<bool>();
    }

    planning::PlanRecord record = [&] {
        std::shared_lock lock(slot->mutex);
        return slot->session.build_plan(patient);
    }();
    const std::string plan_id = store_->save(record, options);
    return respond(201, {{"plan_id", plan_id}, {"plan", plan_json(record, *catalog_)}});
}

ApiResponse Api::get_plan(const std::string& id) const {
    return respond(200, plan_json(store_->load(id), *catalog_));
}

HttpServer::HttpServer(Api& api, std::optional<std::filesystem::path> static_dir)
    : server_(std::make_unique<httplib::Server>()) {
    auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
        const auto r = api.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server_->Get(R"(/(sessions|plans)(/.*)?)", forward);
    server_->Post(R"(/sessions(/.*)?)", forward);
    server_->Put(R"(/sessions/.*)", forward);
    if (static_dir) server_->set_mount_point("/ui", static_dir->string());
    server_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const json body = {{"code", res.status == 404 ? "not_found" : "io_error"},
                           {"message", "no route for " + req.method + " " + req.path}};
        res.set_content(body.dump(), "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) server_->stop();
}

}  // namespace hipplan::service
