#include "dofair/orchestrator.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <mutex>

#include "dofair/clients_http.hpp"
#include "dofair/clients_mock.hpp"
#include "dofair/clients_sim.hpp"
#include "dofair/jsonl.hpp"
#include "dofair/knowledge.hpp"
#include "dofair/pipeline.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace fs = std::filesystem;

namespace {

Json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null: return nullptr;
        case YAML::NodeType::Scalar: {
            const auto& raw = node.Scalar();
            if (raw == "true") return true;
            if (raw == "false") return false;
            try {
                size_t used = 0;
                if (raw.find('.') == std::string::npos &&
                    raw.find('e') == std::string::npos) {
                    long long v = std::stoll(raw, &used);
                    if (used == raw.size()) return v;
                } else {
                    double v = std::stod(raw, &used);
                    if (used == raw.size()) return v;
                }
            } catch (...) {
            }
            return raw;
        }
        case YAML::NodeType::Sequence: {
            Json out = Json::array();
            for (const auto& child : node) out.push_back(yaml_to_json(child));
            return out;
        }
        case YAML::NodeType::Map: {
            Json out = Json::object();
            for (const auto& kv : node) {
                out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            }
            return out;
        }
        default: return nullptr;
    }
}

RunConfig config_from_json(const Json& doc) {
    RunConfig cfg;
    if (doc.contains("benchmark")) cfg.benchmark_path = doc["benchmark"].get<std::string>();
    for (const auto& code : doc.value("conditions", Json::array())) {
        cfg.conditions.push_back(parse_condition(code.get<std::string>()));
    }
    Json backends = doc.value("backends", Json::object());
    cfg.llm_backend = backends.value("llm", cfg.llm_backend);
    cfg.t2i_backend = backends.value("t2i", cfg.t2i_backend);
    cfg.classifier_backend = backends.value("classifier", cfg.classifier_backend);
    cfg.search_backend = backends.value("search", cfg.search_backend);
    Json models = doc.value("models", Json::object());
    cfg.llm_model = models.value("llm", cfg.llm_model);
    cfg.t2i_model = models.value("t2i", cfg.t2i_model);
    Json endpoints = doc.value("endpoints", Json::object());
    cfg.llm_base_url = endpoints.value("llm", cfg.llm_base_url);
    cfg.t2i_base_url = endpoints.value("t2i", cfg.t2i_base_url);
    cfg.search_base_url = endpoints.value("search", cfg.search_base_url);
    cfg.classifier_command = doc.value("classifier_command", cfg.classifier_command);
    if (doc.contains("search_snapshot")) {
        cfg.search_snapshot = doc["search_snapshot"].get<std::string>();
    }
    cfg.images_per_record = doc.value("images_per_record", cfg.images_per_record);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.parallelism = doc.value("parallelism", cfg.parallelism);
    cfg.include_degenerate = doc.value("include_degenerate", cfg.include_degenerate);
    if (doc.value("idf_variant", "support_weighted") == std::string("raw_sum")) {
        cfg.idf_variant = IdfVariant::RawSum;
    }
    cfg.allow_baseline_augmentation =
        doc.value("allow_baseline_augmentation", cfg.allow_baseline_augmentation);
    cfg.knowledge_temperature = doc.value("knowledge_temperature", cfg.knowledge_temperature);
    if (doc.contains("cache_dir")) cfg.cache_dir = doc["cache_dir"].get<std::string>();
    if (doc.contains("runs_root")) cfg.runs_root = doc["runs_root"].get<std::string>();
    return cfg;
}

std::string effective_t2i_model(const RunConfig& cfg) {
    // Sim output depends on the run seed; fold it into the cache identity so
    // differently seeded runs never share image cache entries.
    if (cfg.t2i_backend == "sim") return "sim-t2i-" + std::to_string(cfg.seed);
    if (cfg.t2i_backend == "mock") return "mock-t2i";
    return cfg.t2i_model;
}

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

Json item_to_json(const ItemResult& item) {
    Json row{{"id", item.id},
             {"record_id", item.record_id},
             {"condition", item.condition},
             {"sample", item.sample},
             {"status", item.status}};
    if (!item.reason.empty()) row["reason"] = item.reason;
    if (item.status == "done") {
        row["image_path"] = item.image_path;
        row["n_faces"] = item.n_faces;
        row["score"] = {{"dda", item.score.dda},
                        {"ida", item.score.ida},
                        {"idf", item.score.idf},
                        {"fdd", item.score.fdd}};
    }
    return row;
}

ItemResult item_from_json(const Json& row) {
    ItemResult item;
    item.id = row.value("id", "");
    item.record_id = row.value("record_id", "");
    item.condition = row.value("condition", "");
    item.sample = row.value("sample", 0);
    item.status = row.value("status", "");
    item.reason = row.value("reason", "");
    item.image_path = row.value("image_path", "");
    item.n_faces = row.value("n_faces", 0);
    if (row.contains("score")) {
        item.score.dda = row["score"].value("dda", 0.0);
        item.score.ida = row["score"].value("ida", 0.0);
        item.score.idf = row["score"].value("idf", 0.0);
        item.score.fdd = row["score"].value("fdd", 0.0);
    }
    return item;
}

EventStub stub_from_record(const DofairRecord& record) {
    return {record.event_name, record.role,       record.culture,
            record.time_period, record.dimension, ""};
}

Json counts_json(const ImageDemography& demography) {
    const auto& space = Dimension::of(demography.dimension);
    Json counts = Json::object();
    for (int i = 0; i < space.size(); ++i) {
        counts[std::string(space.label(i))] = demography.counts[static_cast<size_t>(i)];
    }
    return counts;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) {
        raise(Errc::ConfigError, "config file not found: " + path.string());
    }
    Json doc;
    auto ext = path.extension().string();
    if (ext == ".yaml" || ext == ".yml") {
        try {
            doc = yaml_to_json(YAML::LoadFile(path.string()));
        } catch (const YAML::Exception& e) {
            raise(Errc::ConfigError, "bad YAML in " + path.string() + ": " + e.what());
        }
    } else {
        doc = Json::parse(read_file(path), nullptr, false);
        if (doc.is_discarded()) {
            raise(Errc::ConfigError, "bad JSON in " + path.string());
        }
    }
    RunConfig cfg = config_from_json(doc);
    validate_run_config(cfg);
    return cfg;
}

Json run_config_to_json(const RunConfig& config) {
    Json conditions = Json::array();
    for (const auto& c : config.conditions) conditions.push_back(condition_code(c));
    return Json{
        {"benchmark", config.benchmark_path.string()},
        {"conditions", std::move(conditions)},
        {"backends",
         {{"llm", config.llm_backend},
          {"t2i", config.t2i_backend},
          {"classifier", config.classifier_backend},
          {"search", config.search_backend}}},
        {"models", {{"llm", config.llm_model}, {"t2i", config.t2i_model}}},
        {"images_per_record", config.images_per_record},
        {"seed", config.seed},
        {"parallelism", config.parallelism},
        {"include_degenerate", config.include_degenerate},
        {"idf_variant",
         config.idf_variant == IdfVariant::RawSum ? "raw_sum" : "support_weighted"},
        {"allow_baseline_augmentation", config.allow_baseline_augmentation},
        {"knowledge_temperature", config.knowledge_temperature},
    };
}

std::string run_id_for(const RunConfig& config) {
    return "run-" + sha256_hex(run_config_to_json(config).dump()).substr(0, 12);
}

fs::path run_dir_for(const RunConfig& config) {
    return config.runs_root / run_id_for(config);
}

void validate_run_config(const RunConfig& config) {
    if (config.conditions.empty()) {
        raise(Errc::ConfigError, "config lists no conditions");
    }
    if (config.images_per_record < 1) {
        raise(Errc::ConfigError, "images_per_record must be at least 1");
    }
    if (config.parallelism < 1) {
        raise(Errc::ConfigError, "parallelism must be at least 1");
    }
    for (const auto& condition : config.conditions) {
        validate_condition(condition, config.allow_baseline_augmentation);
    }
    auto check = [](const std::string& kind, std::initializer_list<std::string_view> allowed,
                    const char* which) {
        if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) {
            raise(Errc::ConfigError,
                  std::string("unknown ") + which + " backend \"" + kind + "\"");
        }
    };
    check(config.llm_backend, {"mock", "sim", "hosted"}, "llm");
    check(config.t2i_backend, {"mock", "sim", "hosted"}, "t2i");
    check(config.classifier_backend, {"mock", "subprocess"}, "classifier");
    check(config.search_backend, {"mock", "snapshot", "hosted"}, "search");
}

ClientSet make_clients(const RunConfig& config, const std::vector<DofairRecord>& records) {
    ClientSet clients;

    if (config.llm_backend == "sim") {
        clients.llm = std::make_shared<SimKnowledgeLlm>(records);
    } else if (config.llm_backend == "hosted") {
        clients.llm = std::make_shared<HostedLlm>(
            HostedConfig{config.llm_base_url, env_or_throw("DOFAIR_LLM_KEY")},
            config.llm_model);
    } else {
        clients.llm = std::make_shared<ScriptedLlm>(config.llm_model);
    }

    if (config.t2i_backend == "sim") {
        clients.t2i = std::make_shared<SimulatedT2IClient>(records, config.seed,
                                                           effective_t2i_model(config));
    } else if (config.t2i_backend == "hosted") {
        clients.t2i = std::make_shared<HostedT2I>(
            HostedConfig{config.t2i_base_url, env_or_throw("DOFAIR_T2I_KEY")},
            config.t2i_model);
    } else {
        auto mock = std::make_shared<MockT2I>();
        mock->set_default_faces({{0, "White", "Male", 0.99}});
        clients.t2i = mock;
    }

    if (config.classifier_backend == "subprocess") {
        clients.classifier = std::make_shared<SubprocessClassifier>(config.classifier_command);
    } else {
        clients.classifier = std::make_shared<MockClassifier>();
    }

    if (config.search_backend == "snapshot") {
        clients.search = std::make_shared<SnapshotSearch>(config.search_snapshot.string());
    } else if (config.search_backend == "hosted") {
        clients.search = std::make_shared<HostedSearch>(
            HostedConfig{config.search_base_url, env_or_throw("DOFAIR_SEARCH_KEY")});
    } else {
        auto mock = std::make_shared<MockSearch>();
        mock->set_lenient(true);
        clients.search = mock;
    }

    if (!config.cache_dir.empty()) {
        clients.llm = std::make_shared<CachingLlm>(clients.llm, config.cache_dir);
        clients.t2i = std::make_shared<CachingT2I>(clients.t2i, config.cache_dir);
        clients.search = std::make_shared<CachingSearch>(clients.search, config.cache_dir);
    }
    clients.llm = std::make_shared<RetryingLlm>(clients.llm);
    clients.search = std::make_shared<RetryingSearch>(clients.search);
    return clients;
}

Json manifest_to_json(const RunManifest& manifest) {
    Json items = Json::array();
    for (const auto& item : manifest.items) items.push_back(item_to_json(item));
    return Json{{"run_id", manifest.run_id},
                {"config", manifest.config},
                {"counts",
                 {{"done", manifest.done},
                  {"refused", manifest.refused},
                  {"failed", manifest.failed}}},
                {"items", std::move(items)}};
}

RunManifest run_experiment(const RunConfig& config) {
    Benchmark benchmark = load_benchmark(config.benchmark_path);
    ClientSet clients = make_clients(config, benchmark.records);
    return run_experiment(config, clients);
}

RunManifest run_experiment(const RunConfig& config, const ClientSet& clients) {
    validate_run_config(config);
    Benchmark benchmark = load_benchmark(config.benchmark_path);
    if (benchmark.records.empty()) {
        raise(Errc::ConfigError, "benchmark has no records");
    }

    auto started_at = iso_utc_now();
    auto t0 = std::chrono::steady_clock::now();

    fs::path run_dir = run_dir_for(config);
    fs::create_directories(run_dir / "images");

    // Previously journaled outcomes; done and refused items stay settled,
    // failed ones get another attempt.
    std::map<std::string, ItemResult> settled;
    for (const auto& line : read_jsonl_lenient(run_dir / "items.jsonl")) {
        ItemResult item = item_from_json(line.value);
        if (item.id.empty()) continue;
        if (item.status == "done" || item.status == "refused") {
            settled[item.id] = std::move(item);
        }
    }

    struct WorkItem {
        const DofairRecord* record;
        Condition condition;
        int sample;
        std::string id;
    };
    std::vector<WorkItem> work;
    for (const auto& record : benchmark.records) {
        for (const auto& condition : config.conditions) {
            for (int k = 0; k < config.images_per_record; ++k) {
                std::string id =
                    record.record_id() + "|" + condition_code(condition) + "|" + std::to_string(k);
                work.push_back({&record, condition, k, std::move(id)});
            }
        }
    }

    JsonlWriter journal(run_dir / "items.jsonl");
    JsonlWriter score_log(run_dir / "scores.jsonl");
    JsonlWriter prompt_log(run_dir / "prompts.jsonl");

    // Knowledge is per record x augmentation, shared across samples.
    std::mutex knowledge_mu;
    std::map<std::string, std::pair<std::string, KnowledgeProvenance>> knowledge_memo;

    auto fetch_knowledge = [&](const DofairRecord& record, const Condition& condition)
        -> std::pair<std::string, KnowledgeProvenance> {
        std::string key = record.record_id() + "|" +
                          (condition.augmentation == Augmentation::FaiVk ? "vk" : "rk");
        {
            std::lock_guard lock(knowledge_mu);
            if (auto it = knowledge_memo.find(key); it != knowledge_memo.end()) {
                return it->second;
            }
        }
        std::pair<std::string, KnowledgeProvenance> result;
        if (condition.augmentation == Augmentation::FaiVk) {
            result = {verbalize_knowledge(record, *clients.llm),
                      {KnowledgeKind::Verbalized, {}}};
        } else {
            auto queries = build_retrieval_queries(stub_from_record(record), *clients.llm);
            auto evidence = retrieve_evidence(queries, *clients.search);
            auto retrieved = summarize_retrieved_knowledge(record, evidence, *clients.llm);
            result = {retrieved.instruction, {KnowledgeKind::Retrieved, retrieved.doc_ids}};
        }
        std::lock_guard lock(knowledge_mu);
        knowledge_memo.emplace(key, result);
        return result;
    };

    std::vector<ItemResult> results(work.size());
    RenderOptions render_options{config.allow_baseline_augmentation};

    parallel_for_each(work.size(), config.parallelism, [&](size_t i) {
        const auto& w = work[i];
        if (auto it = settled.find(w.id); it != settled.end()) {
            results[i] = it->second;
            return;
        }
        ItemResult item;
        item.id = w.id;
        item.record_id = w.record->record_id();
        item.condition = condition_code(w.condition);
        item.sample = w.sample;
        try {
            std::optional<std::string> knowledge;
            std::optional<KnowledgeProvenance> provenance;
            if (w.condition.requires_knowledge()) {
                auto [text, prov] = fetch_knowledge(*w.record, w.condition);
                knowledge = text;
                provenance = prov;
            }
            GenerationPrompt prompt =
                render_prompt(*w.record, w.condition, knowledge, provenance, render_options);
            if (w.sample == 0) {
                Json prov = nullptr;
                if (prompt.provenance) {
                    prov = Json{{"kind", prompt.provenance->kind == KnowledgeKind::Verbalized
                                             ? "verbalized"
                                             : "retrieved"},
                                {"doc_ids", prompt.provenance->doc_ids}};
                }
                prompt_log.append(Json{{"record_id", item.record_id},
                                       {"condition", item.condition},
                                       {"prompt", prompt.text},
                                       {"knowledge_provenance", std::move(prov)}});
            }

            ImageResult image = clients.t2i->generate(
                {prompt.text, 1024, 1024, effective_t2i_model(config), w.sample});
            if (image.refused) {
                item.status = "refused";
                item.reason = image.refusal_reason;
            } else {
                std::string file_name = item.record_id + "-" + item.condition + "-" +
                                        std::to_string(w.sample) + ".png";
                fs::path image_path = run_dir / "images" / file_name;
                atomic_write_file(image_path, image.png_bytes);

                auto faces = clients.classifier->classify(image.png_bytes);
                auto demography = aggregate_distribution(faces, w.record->dimension);
                item.score = score_image(demography, *w.record, config.idf_variant);
                item.n_faces = demography.face_count();
                item.image_path = "images/" + file_name;
                item.status = "done";

                score_log.append(Json{{"id", item.id},
                                      {"record_id", item.record_id},
                                      {"condition", item.condition},
                                      {"image_path", item.image_path},
                                      {"counts", counts_json(demography)},
                                      {"dda", item.score.dda},
                                      {"ida", item.score.ida},
                                      {"idf", item.score.idf},
                                      {"fdd", item.score.fdd},
                                      {"n_faces", item.n_faces}});
            }
        } catch (const Error& e) {
            item.status = "failed";
            item.reason = std::string(errc_name(e.code())) + ": " + e.what();
        }
        journal.append(item_to_json(item));
        results[i] = std::move(item);
    });

    RunManifest manifest;
    manifest.run_id = run_id_for(config);
    manifest.config = run_config_to_json(config);
    manifest.items = std::move(results);
    std::sort(manifest.items.begin(), manifest.items.end(),
              [](const ItemResult& a, const ItemResult& b) { return a.id < b.id; });
    for (const auto& item : manifest.items) {
        if (item.status == "done") ++manifest.done;
        else if (item.status == "refused") ++manifest.refused;
        else ++manifest.failed;
    }

    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    Json doc = manifest_to_json(manifest);
    doc["timing"] = {{"started_at", started_at}, {"wall_ms", wall_ms}};
    atomic_write_file(run_dir / "manifest.json", doc.dump(2));
    return manifest;
}

std::vector<MetricReport> score_run(const fs::path& run_dir) {
    auto manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        raise(Errc::EmptyRun, "no manifest at " + manifest_path.string());
    }
    Json manifest = Json::parse(read_file(manifest_path));

    AggregateOptions options;
    options.include_degenerate = manifest["config"].value("include_degenerate", false);

    // Last score row per item wins; an interrupted run can journal an item
    // twice.
    std::map<std::string, Json> latest;
    for (const auto& line : read_jsonl_lenient(run_dir / "scores.jsonl")) {
        auto id = line.value.value("id", "");
        if (!id.empty()) latest[id] = line.value;
    }

    std::vector<std::string> condition_order;
    for (const auto& code : manifest["config"]["conditions"]) {
        condition_order.push_back(code.get<std::string>());
    }

    std::map<std::string, std::pair<std::vector<ImageScore>, std::vector<int>>> grouped;
    for (const auto& [id, row] : latest) {
        ImageScore score{row.value("dda", 0.0), row.value("ida", 0.0), row.value("idf", 0.0),
                         row.value("fdd", 0.0)};
        auto& bucket = grouped[row.value("condition", "")];
        bucket.first.push_back(score);
        bucket.second.push_back(row.value("n_faces", 0));
    }

    std::vector<MetricReport> reports;
    for (const auto& condition : condition_order) {
        auto it = grouped.find(condition);
        if (it == grouped.end()) continue;
        try {
            reports.push_back(
                aggregate_metrics(it->second.first, it->second.second, options, condition));
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyRun) throw;  // all-degenerate bucket drops out
        }
    }
    if (reports.empty()) {
        raise(Errc::EmptyRun, "run has no scorable items");
    }
    return reports;
}

}  // namespace dofair
