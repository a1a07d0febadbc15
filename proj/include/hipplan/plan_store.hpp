/**
 * @file plan_store.hpp
 * @brief Directory of plan files, one record per `<id>.plan` file.
 */
#pragma once

#include <hipplan/planning.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace hipplan::planning {

struct SaveOptions {
    /// Explicit record id. When empty an id is derived from the patient id and
    /// the save time.
    std::optional<std::string> id;
    /// Replace an existing record with the same id.
    bool overwrite = false;
};

class PlanStore {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    /// Creates the directory if needed. The catalog is used for consistency
    /// checks on save.
    PlanStore(std::filesystem::path dir, std::shared_ptr<const sizing::ImplantCatalog> catalog,
              Clock clock = [] { return std::chrono::system_clock::now(); });

    /// Checks consistency, then writes atomically (temp file + rename).
    /// Errors: Consistency / Validation on bad records, State when the id
    /// exists and overwrite is off, Io on write failure.
    std::string save(const PlanRecord& record, const SaveOptions& options = {});

    /// Errors: NotFound for unknown ids, Parse for corrupt files.
    PlanRecord load(const std::string& id) const;

    bool exists(const std::string& id) const;
    std::filesystem::path path_for(const std::string& id) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Ids contain only [A-Za-z0-9._-] and do not start with '.'.
    static bool valid_id(std::string_view id);
    /// Replaces characters outside the id alphabet with '_'.
    static std::string sanitize(std::string_view text);

private:
    std::shared_ptr<std::mutex> lock_for(const std::string& id);

    std::filesystem::path dir_;
    std::shared_ptr<const sizing::ImplantCatalog> catalog_;
    Clock clock_;
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace hipplan::planning
