#include <hipplan/plan_store.hpp>
#include <hipplan/error.hpp>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <system_error>

namespace hipplan::planning {

namespace fs = std::filesystem;

PlanStore::PlanStore(fs::path dir, std::shared_ptr<const sizing::ImplantCatalog> catalog, Clock clock)
    : dir_(std::move(dir)), catalog_(std::move(catalog)), clock_(std::move(clock)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
        throw Error(ErrorCode::Io, "plan store: cannot use directory '" + dir_.string() + "'");
    }
}

bool PlanStore::valid_id(std::string_view id) {
    if (id.empty() || id.front() == '.' || id.size() > 200) return false;
    for (char ch : id) {
        const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                        (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' || ch == '-';
        if (!ok) return false;
    }
    return true;
}

std::string PlanStore::sanitize(std::string_view text) {
    std::string out;
    for (char ch : text) {
        const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                        (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' || ch == '-';
        out += ok ? ch : '_';
    }
    while (!out.empty() && out.front() == '.') out.front() = '_';
    if (out.empty()) out = "plan";
    return out;
}

fs::path PlanStore::path_for(const std::string& id) const { return dir_ / (id + ".plan"); }

bool PlanStore::exists(const std::string& id) const {
    return valid_id(id) && fs::exists(path_for(id));
}

std::shared_ptr<std::mutex> PlanStore::lock_for(const std::string& id) {
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

std::string PlanStore::save(const PlanRecord& record, const SaveOptions& options) {
    check_consistency(record, *catalog_);
    const std::string body = serialize_plan(record);

    std::string id;
    std::shared_ptr<std::mutex> lock;
    std::unique_lock<std::mutex> held;
    if (options.id) {
        id = *options.id;
        if (!valid_id(id)) throw Error(ErrorCode::Validation, "plan store: invalid id '" + id + "'");
        lock = lock_for(id);
        held = std::unique_lock(*lock);
        if (!options.overwrite && fs::exists(path_for(id))) {
            throw Error(ErrorCode::State, "plan store: '" + id + "' exists and overwrite is off");
        }
    } else {
        const std::time_t stamp = std::chrono::system_clock::to_time_t(clock_());
        const std::string base =
            sanitize(record.patient_id) + fmt::format("-{:%Y%m%dT%H%M%SZ}", fmt::gmtime(stamp));
        for (int n = 1;; ++n) {
            id = n == 1 ? base : base + "-" + std::to_string(n);
            lock = lock_for(id);
            held = std::unique_lock(*lock);
            if (!fs::exists(path_for(id))) break;
            held.unlock();
        }
    }

    const fs::path final_path = path_for(id);
    fs::path tmp = final_path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out || !(out << body) || !out.flush()) {
            throw Error(ErrorCode::Io, "plan store: cannot write '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::Io, "plan store: cannot commit '" + final_path.string() + "'");
    }
    return id;
}

PlanRecord PlanStore::load(const std::string& id) const {
    if (!valid_id(id)) throw Error(ErrorCode::NotFound, "plan store: no plan '" + id + "'");
    const fs::path p = path_for(id);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "plan store: no plan '" + id + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_plan(buf.str(), p.filename().string());
}

}  // namespace hipplan::planning
