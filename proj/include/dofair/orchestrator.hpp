#pragma once

#include <filesystem>
#include <memory>

#include "dofair/cache.hpp"
#include "dofair/clients.hpp"
#include "dofair/conditions.hpp"
#include "dofair/metrics.hpp"
#include "dofair/record.hpp"

namespace dofair {

/// Backend selectors: "mock", "sim", "hosted" for llm/t2i/search ("snapshot"
/// for search replays a recorded file); classifier takes "mock" or
/// "subprocess".
struct RunConfig {
    std::filesystem::path benchmark_path;
    std::vector<Condition> conditions;

    std::string llm_backend = "mock";
    std::string t2i_backend = "mock";
    std::string classifier_backend = "mock";
    std::string search_backend = "mock";

    std::string llm_model = kDefaultLlmModel;
    std::string t2i_model = "dall-e-3";
    std::string llm_base_url = "https://api.openai.com";
    std::string t2i_base_url = "https://api.openai.com";
    std::string search_base_url;
    std::string classifier_command;
    std::filesystem::path search_snapshot;

    int images_per_record = 1;
    uint64_t seed = 0;
    int parallelism = 4;
    bool include_degenerate = false;
    IdfVariant idf_variant = IdfVariant::SupportWeighted;
    bool allow_baseline_augmentation = false;
    double knowledge_temperature = 0.0;

    std::filesystem::path cache_dir = "cache";
    std::filesystem::path runs_root = "runs";
};

/// Reads a YAML or JSON config file (by extension; .yaml/.yml via yaml-cpp).
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON snapshot; field order is fixed so the digest is stable.
Json run_config_to_json(const RunConfig& config);

/// "run-" + first 12 hex chars of sha256 over the canonical config snapshot.
std::string run_id_for(const RunConfig& config);

/// ConfigError on structural problems (no conditions, bad counts, unknown
/// backend or condition combination).
void validate_run_config(const RunConfig& config);

struct ClientSet {
    std::shared_ptr<LlmClient> llm;
    std::shared_ptr<T2IClient> t2i;
    std::shared_ptr<FaceClassifier> classifier;
    std::shared_ptr<SearchClient> search;
};

/// Builds the configured backends, wrapping llm/t2i/search in content-hash
/// caches (under cache_dir) and retry layers. Sim backends need the records.
ClientSet make_clients(const RunConfig& config, const std::vector<DofairRecord>& records);

struct ItemResult {
    std::string id;  // record_id|condition|sample
    std::string record_id;
    std::string condition;
    int sample = 0;
    std::string status;  // done | refused | failed
    std::string reason;
    std::string image_path;
    ImageScore score;
    int n_faces = 0;
};

struct RunManifest {
    std::string run_id;
    Json config;
    std::vector<ItemResult> items;  // sorted by id
    int done = 0;
    int refused = 0;
    int failed = 0;
};

Json manifest_to_json(const RunManifest& manifest);

/// Runs the full record x condition x sample matrix. Per-item failures land
/// in the manifest; the journal under runs_root/<run id>/items.jsonl makes
/// reruns skip finished items, so an interrupted run resumes where it died.
RunManifest run_experiment(const RunConfig& config);
RunManifest run_experiment(const RunConfig& config, const ClientSet& clients);

/// Per-condition means over the persisted scores of one run, in config
/// condition order. EmptyRun when no item is scorable.
std::vector<MetricReport> score_run(const std::filesystem::path& run_dir);

std::filesystem::path run_dir_for(const RunConfig& config);

}  // namespace dofair
