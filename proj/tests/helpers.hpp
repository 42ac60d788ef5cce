#pragma once

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "dofair/labels.hpp"
#include "dofair/record.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return DOFAIR_SOURCE_DIR; }

inline std::filesystem::path fixture(const std::string& name) {
    return source_dir() / "tests" / "fixtures" / name;
}

inline std::filesystem::path template_dir() { return source_dir() / "templates"; }

/// Fresh directory under the system temp root, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("dofair-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline dofair::LabelSet set_of(dofair::Dim dim, std::initializer_list<std::string_view> labels) {
    dofair::LabelSet set(dim);
    for (auto label : labels) set.insert(label);
    return set;
}

inline dofair::DofairRecord record_with(dofair::Dim dim, std::string event, std::string role,
                                        std::initializer_list<std::string_view> dominant,
                                        std::initializer_list<std::string_view> involved) {
    dofair::DofairRecord record;
    record.event_name = std::move(event);
    record.role = std::move(role);
    record.culture = "North America";
    record.time_period = "1760-1789";
    record.dimension = dim;
    record.dominant = set_of(dim, dominant);
    record.involved = set_of(dim, involved);
    record.evidence = {{"https://en.wikipedia.org/wiki/Example", "a supporting quote"}};
    return record;
}

}  // namespace testutil
