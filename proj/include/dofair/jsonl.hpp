#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace dofair {

using Json = nlohmann::ordered_json;

struct JsonlLine {
    size_t line_number;  // 1-based
    Json value;
};

/// Parses every non-blank line. Throws Error(ParseError) naming the first bad
/// line. Missing file throws ParseError too.
std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path);

/// Journal variant: malformed or truncated lines are skipped instead of
/// throwing, so a file cut off mid-write still loads.
std::vector<JsonlLine> read_jsonl_lenient(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

/// Append-only JSONL sink; one fully formed, flushed line per append.
/// Thread-safe.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);

    void append(const Json& row);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace dofair
