/**
 * @file service.hpp
 * @brief JSON API over planning sessions. See docs/API.md for the routes.
 *
 * Api::handle is transport-free so it can be driven directly; HttpServer
 * binds it to cpp-httplib.
 */
#pragma once

#include <hipplan/error.hpp>
#include <hipplan/plan_store.hpp>
#include <hipplan/session.hpp>
#include <hipplan/sizing.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace hipplan::service {

/// Closed set of error codes carried by every 4xx/5xx body.
enum class ApiErrorCode {
    InvalidMeasurement,
    CalibrationMissing,
    SizeOutOfRange,
    NotFound,
    StateError,
    ParseError,
    IoError,
};

std::string_view to_string(ApiErrorCode code);

struct ApiError {
    ApiErrorCode code;
    int status;
    std::string message;
    std::optional<std::string> reason;  // extra detail, e.g. "consistency"
};

/// Maps a library error onto the API taxonomy.
ApiError to_api_error(const Error& e);

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

class Api {
public:
    using IdGenerator = std::function<std::string()>;

    Api(std::shared_ptr<const sizing::ImplantCatalog> catalog,
        std::shared_ptr<planning::PlanStore> store, IdGenerator next_id = {});

    ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

    std::size_t session_count() const;

private:
    struct Slot {
        std::shared_mutex mutex;
        planning::Session session;

        explicit Slot(planning::Session s) : session(std::move(s)) {}
    };

    std::shared_ptr<Slot> find(const std::string& id) const;

    ApiResponse create_session(std::string_view body);
    ApiResponse get_session(const std::string& id) const;
    ApiResponse get_image(const std::string& id) const;
    ApiResponse put_calibration(const std::string& id, std::string_view body);
    ApiResponse put_measurement(const std::string& id, std::string_view body);
    ApiResponse put_placement(const std::string& id, std::string_view body);
    ApiResponse post_plan(const std::string& id, std::string_view body);
    ApiResponse get_plan(const std::string& id) const;

    std::shared_ptr<const sizing::ImplantCatalog> catalog_;
    std::shared_ptr<planning::PlanStore> store_;
    IdGenerator next_id_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

/// Random 128-bit hex id.
std::string random_session_id();

class HttpServer {
public:
    /// `static_dir`, when set, is served under /ui/.
    explicit HttpServer(Api& api, std::optional<std::filesystem::path> static_dir = {});
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and returns the port (an ephemeral one when `port` is 0); -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    bool serve();
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace hipplan::service
