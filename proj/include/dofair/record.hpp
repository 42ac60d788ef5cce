#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dofair/jsonl.hpp"
#include "dofair/labels.hpp"

namespace dofair {

struct EvidenceRef {
    std::string doc_id;
    std::string quote;

    bool operator==(const EvidenceRef&) const = default;
};

/// One benchmark row: a participant class in a historical event and the
/// ground-truth demographic sets for it, with the evidence that backs them.
struct DofairRecord {
    std::string event_name;
    std::string role;
    std::string culture;
    std::string time_period;
    Dim dimension = Dim::Race;
    LabelSet dominant{Dim::Race};
    LabelSet involved{Dim::Race};
    std::vector<EvidenceRef> evidence;

    /// Stable identifier derived from (event, role); used to key scores and
    /// run items.
    std::string record_id() const;
};

struct Benchmark {
    std::vector<DofairRecord> records;
    Dim dimension = Dim::Race;
    std::string provenance;
};

/// Returns the record iff every schema invariant holds; throws Error with
/// InvalidLabel / EmptySet / SubsetViolation / MissingEvidence otherwise.
const DofairRecord& validate_record(const DofairRecord& record);

Json record_to_json(const DofairRecord& record);
DofairRecord record_from_json(const Json& value);

Benchmark load_benchmark(const std::filesystem::path& path);
void save_benchmark(const Benchmark& benchmark, const std::filesystem::path& path);

struct LabelTally {
    std::string label;
    int dominant_count = 0;
    int involved_count = 0;
};

struct CultureTally {
    std::string culture;
    int count = 0;
};

struct BenchmarkSummary {
    Dim dimension = Dim::Race;
    std::vector<LabelTally> per_label;    // canonical label order
    std::vector<CultureTally> per_culture;  // seed-culture order, extras appended
    int total = 0;
};

BenchmarkSummary summarize_benchmark(const Benchmark& benchmark);
std::string render_summary(const BenchmarkSummary& summary);

}  // namespace dofair
