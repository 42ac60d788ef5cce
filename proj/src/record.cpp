#include "dofair/record.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dofair/util.hpp"

namespace dofair {

namespace {

const std::vector<std::string> kSeedCultures = {"Africa", "Asia", "Europe", "North America",
                                                "South America", "Australia"};

LabelSet labels_from_json(Dim dim, const Json& value, const char* field) {
    if (!value.is_array()) raise(Errc::ParseError, std::string(field) + " must be an array");
    LabelSet out(dim);
    for (const auto& item : value) {
        if (!item.is_string()) raise(Errc::ParseError, std::string(field) + " entries must be strings");
        out.insert(item.get<std::string>());  // throws InvalidLabel outside the space
    }
    return out;
}

std::string require_string(const Json& value, const char* field) {
    if (!value.contains(field) || !value[field].is_string()) {
        raise(Errc::ParseError, std::string("missing or non-string field \"") + field + "\"");
    }
    return value[field].get<std::string>();
}

}  // namespace

std::string DofairRecord::record_id() const {
    return "r" + sha256_hex(event_name + "\x1f" + role).substr(0, 12);
}

const DofairRecord& validate_record(const DofairRecord& record) {
    const auto& space = Dimension::of(record.dimension);
    if (record.dominant.dim() != record.dimension || record.involved.dim() != record.dimension) {
        raise(Errc::InvalidLabel, "label sets belong to a different dimension than the record");
    }
    if (record.dominant.empty()) {
        raise(Errc::EmptySet, "dominant set is empty for \"" + record.event_name + "\"");
    }
    if (record.involved.empty()) {
        raise(Errc::EmptySet, "involved set is empty for \"" + record.event_name + "\"");
    }
    if (!record.dominant.subset_of(record.involved)) {
        raise(Errc::SubsetViolation,
              "dominant is not a subset of involved for \"" + record.event_name + "\"");
    }
    // The wire format carries a flat evidence list, so per-label coverage is
    // checked upstream where labels and references are still paired; here a
    // record with non-empty sets must carry at least one reference.
    if (record.evidence.empty()) {
        raise(Errc::MissingEvidence, "no evidence references for \"" + record.event_name + "\"");
    }
    for (const auto& ref : record.evidence) {
        if (ref.doc_id.empty()) raise(Errc::MissingEvidence, "evidence entry with empty doc_id");
    }
    (void)space;
    return record;
}

Json record_to_json(const DofairRecord& record) {
    Json evidence = Json::array();
    for (const auto& ref : record.evidence) {
        evidence.push_back({{"doc_id", ref.doc_id}, {"quote", ref.quote}});
    }
    return Json{{"event", record.event_name},
                {"role", record.role},
                {"culture", record.culture},
                {"time_period", record.time_period},
                {"dimension", std::string(dim_name(record.dimension))},
                {"dominant", record.dominant.to_strings()},
                {"involved", record.involved.to_strings()},
                {"evidence", std::move(evidence)}};
}

DofairRecord record_from_json(const Json& value) {
    if (!value.is_object()) raise(Errc::ParseError, "record line is not a JSON object");
    DofairRecord record;
    record.event_name = require_string(value, "event");
    record.role = require_string(value, "role");
    record.culture = require_string(value, "culture");
    record.time_period = require_string(value, "time_period");
    auto dim = parse_dim(require_string(value, "dimension"));
    if (!dim) raise(Errc::ParseError, "dimension must be \"race\" or \"gender\"");
    record.dimension = *dim;
    if (!value.contains("dominant") || !value.contains("involved")) {
        raise(Errc::ParseError, "record needs dominant and involved label arrays");
    }
    record.dominant = labels_from_json(record.dimension, value["dominant"], "dominant");
    record.involved = labels_from_json(record.dimension, value["involved"], "involved");
    if (value.contains("evidence")) {
        if (!value["evidence"].is_array()) raise(Errc::ParseError, "evidence must be an array");
        for (const auto& item : value["evidence"]) {
            record.evidence.push_back(
                {require_string(item, "doc_id"), require_string(item, "quote")});
        }
    }
    return record;
}

Benchmark load_benchmark(const std::filesystem::path& path) {
    Benchmark benchmark;
    benchmark.provenance = path.stem().string();
    std::set<std::pair<std::string, std::string>> seen;
    bool first = true;
    for (const auto& line : read_jsonl(path)) {
        DofairRecord record;
        try {
            record = record_from_json(line.value);
            validate_record(record);
        } catch (const Error& e) {
            throw Error(e.code(), path.filename().string() + " line " +
                                      std::to_string(line.line_number) + ": " + e.what());
        }
        if (first) {
            benchmark.dimension = record.dimension;
            first = false;
        } else if (record.dimension != benchmark.dimension) {
            raise(Errc::ParseError, path.filename().string() + " line " +
                                        std::to_string(line.line_number) +
                                        ": mixed dimensions in one benchmark");
        }
        if (!seen.insert({record.event_name, record.role}).second) {
            raise(Errc::DuplicateRecord,
                  path.filename().string() + " line " + std::to_string(line.line_number) +
                      ": duplicate (event, role) \"" + record.event_name + "\" / \"" +
                      record.role + "\"");
        }
        benchmark.records.push_back(std::move(record));
    }
    return benchmark;
}

void save_benchmark(const Benchmark& benchmark, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& record : benchmark.records) out << record_to_json(record).dump() << '\n';
    atomic_write_file(path, out.str());
}

BenchmarkSummary summarize_benchmark(const Benchmark& benchmark) {
    if (benchmark.records.empty()) raise(Errc::EmptyBenchmark, "benchmark has no records");
    BenchmarkSummary summary;
    summary.dimension = benchmark.dimension;
    summary.total = static_cast<int>(benchmark.records.size());

    const auto& space = Dimension::of(benchmark.dimension);
    for (int i = 0; i < space.size(); ++i) {
        summary.per_label.push_back({std::string(space.label(i)), 0, 0});
    }
    for (const auto& record : benchmark.records) {
        for (int i = 0; i < space.size(); ++i) {
            if (record.dominant.contains(i)) ++summary.per_label[static_cast<size_t>(i)].dominant_count;
            if (record.involved.contains(i)) ++summary.per_label[static_cast<size_t>(i)].involved_count;
        }
    }

    std::vector<std::string> order = kSeedCultures;
    for (const auto& record : benchmark.records) {
        if (std::find(order.begin(), order.end(), record.culture) == order.end()) {
            order.push_back(record.culture);
        }
    }
    for (const auto& culture : order) {
        int count = static_cast<int>(std::count_if(
            benchmark.records.begin(), benchmark.records.end(),
            [&](const DofairRecord& r) { return r.culture == culture; }));
        if (count > 0) summary.per_culture.push_back({culture, count});
    }
    return summary;
}

std::string render_summary(const BenchmarkSummary& summary) {
    std::ostringstream out;
    out << "dimension: " << dim_name(summary.dimension) << "\n";
    out << "label            dominant  involved\n";
    for (const auto& row : summary.per_label) {
        out << row.label;
        for (size_t i = row.label.size(); i < 17; ++i) out << ' ';
        out << row.dominant_count << "  " << row.involved_count << "\n";
    }
    out << "per-culture:";
    for (const auto& row : summary.per_culture) out << " " << row.culture << "=" << row.count;
    out << "\ntotal: " << summary.total << "\n";
    return out.str();
}

}  // namespace dofair
