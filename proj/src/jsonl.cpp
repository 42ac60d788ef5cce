#include "dofair/jsonl.hpp"

#include "dofair/errors.hpp"

namespace dofair {

namespace {

std::vector<JsonlLine> read_lines(const std::filesystem::path& path, bool lenient) {
    std::ifstream in(path);
    if (!in) {
        if (lenient) return {};
        raise(Errc::ParseError, "cannot open " + path.string());
    }
    std::vector<JsonlLine> rows;
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json value = Json::parse(line, nullptr, false);
        if (value.is_discarded()) {
            if (lenient) continue;
            raise(Errc::ParseError,
                  path.filename().string() + " line " + std::to_string(line_number) +
                      " is not valid JSON");
        }
        rows.push_back({line_number, std::move(value)});
    }
    return rows;
}

}  // namespace

std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path) {
    return read_lines(path, false);
}

std::vector<JsonlLine> read_jsonl_lenient(const std::filesystem::path& path) {
    return read_lines(path, true);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(Errc::ParseError, "cannot open " + path.string() + " for writing");
    for (const auto& row : rows) out << row.dump() << '\n';
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::app);
    if (!out_) raise(Errc::ParseError, "cannot open " + path.string() + " for appending");
}

void JsonlWriter::append(const Json& row) {
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << row.dump() << '\n';
    out_.flush();
}

}  // namespace dofair
