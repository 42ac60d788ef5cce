#pragma once

#include <filesystem>
#include <span>

#include "dofair/clients.hpp"
#include "dofair/evidence.hpp"
#include "dofair/record.hpp"

namespace dofair {

/// Seed descriptors: 11 thirty-year periods (the last one shortened to
/// 2000-2024) crossed with 6 cultures and the dimension's labels.
std::span<const std::string_view> seed_time_periods();
std::span<const std::string_view> seed_cultures();

struct SeedCombination {
    std::string time_period;
    std::string culture;
    std::string demographic;
    Dim dimension = Dim::Race;
};

/// Full Cartesian product in descriptor order: 462 for race, 132 for gender.
std::vector<SeedCombination> enumerate_seed_combinations(Dim dimension);

std::string render_event_sampling_prompt(const SeedCombination& seed);

/// An event/role pair sampled for a seed, before any fact labeling.
struct EventStub {
    std::string event_name;
    std::string role;
    std::string culture;
    std::string time_period;
    Dim dimension = Dim::Race;
    std::string seed_demographic;
};

/// Extracts events and roles from an event-sampling response. Locates the
/// outermost JSON object, tolerating surrounding prose and markdown fences;
/// exact duplicate (event, role) pairs collapse to one.
std::vector<EventStub> parse_event_response(const std::string& raw, const SeedCombination& seed);

struct QuerySet {
    std::vector<std::string> dominant_queries;
    std::vector<std::string> existence_queries;
};

/// 3 LLM-drafted queries per question, plus one templated existence query per
/// demographic label. Unparseable LLM output is retried up to 3 times with an
/// explicit JSON-only instruction before UnparseableResponse escapes.
QuerySet build_retrieval_queries(const EventStub& stub, LlmClient& llm);

inline constexpr int kPassagesPerQuery = 10;
inline constexpr int kChunkWindowTokens = 512;
inline constexpr int kChunkStrideTokens = 256;
inline constexpr int kChunksPerQuery = 5;

/// Top-10 passages per query, non-wikipedia URLs dropped, the rest chunked
/// (512-token window, 256 stride) and ranked lexically against the query;
/// the 5 best chunks per query are kept. EmptyEvidence when every query comes
/// back without a wikipedia source.
EvidenceSet retrieve_evidence(const QuerySet& queries, SearchClient& search);

struct LabeledFact {
    std::string label;
    EvidenceRef evidence;
};

/// Labels with their references, still paired per answer. "None" answers and
/// answers without usable references are already dropped.
struct FactLabel {
    std::vector<LabeledFact> dominant;
    std::vector<LabeledFact> involved;
};

/// Two fact-check calls (dominant, involved) grounded in the evidence.
/// Answers outside the label space are dropped; a dominant label missing from
/// the involved answer is added to it. AllAnswersNone when nothing usable
/// remains on either side.
FactLabel label_facts(const EventStub& stub, const EvidenceSet& evidence, LlmClient& llm);

DofairRecord make_record(const EventStub& stub, const FactLabel& facts);

struct CleanPolicy {
    int race_quota_per_culture = 100;
    int gender_quota_per_culture = 26;
};

struct CultureShortfall {
    std::string culture;
    int wanted = 0;
    int got = 0;
};

struct CleanStats {
    int dropped_empty = 0;
    int dropped_gendered_role = 0;
    int dropped_duplicate_event = 0;
    int dropped_over_quota = 0;
    std::vector<CultureShortfall> shortfalls;
};

/// Final cleaning pass: drops records with an empty set, drops gender records
/// whose role starts with a gender word, keeps one record per event (uniform
/// under `rng_seed`), then samples each culture down to quota. Gender
/// trimming removes only male-dominant records while any remain. Quota
/// shortfalls are reported, not fatal.
Benchmark clean_and_resample(std::vector<DofairRecord> records, const CleanPolicy& policy,
                             uint64_t rng_seed, CleanStats* stats = nullptr);

struct ConstructionConfig {
    Dim dimension = Dim::Race;
    std::filesystem::path out_dir;
    int workers = 4;
    uint64_t seed = 0;
    CleanPolicy policy;
    int max_seeds = 0;  // 0 = all combinations; tests cap this
};

/// End-to-end construction: sampling, queries, retrieval, labeling, cleaning.
/// Each stage persists its JSONL artifact under out_dir (01_stubs.jsonl ...
/// 05_benchmark.jsonl); stubs that fail a stage are skipped with their reason
/// recorded in skipped.jsonl.
Benchmark run_construction(const ConstructionConfig& config, LlmClient& llm,
                           SearchClient& search);

}  // namespace dofair
