#include "dofair/cache.hpp"

#include <fstream>

#include "dofair/jsonl.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace fs = std::filesystem;

namespace {

fs::path ensure_dir(fs::path root, const char* client) {
    auto dir = root / client;
    fs::create_directories(dir);
    return dir;
}

std::optional<Json> load_json_entry(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    Json value = Json::parse(in, nullptr, false);
    if (value.is_discarded()) return std::nullopt;  // truncated write, treat as miss
    return value;
}

}  // namespace

CachingLlm::CachingLlm(std::shared_ptr<LlmClient> inner, fs::path cache_root)
    : inner_(std::move(inner)), dir_(ensure_dir(std::move(cache_root), "llm")) {}

std::string CachingLlm::chat(const std::vector<ChatMessage>& messages, bool json_mode) {
    Json key{{"model", inner_->model_id()}, {"json_mode", json_mode}, {"messages", Json::array()}};
    for (const auto& m : messages) {
        key["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    auto path = dir_ / (sha256_hex(key.dump()) + ".json");
    if (auto entry = load_json_entry(path)) {
        hits_.fetch_add(1);
        return entry->at("response").get<std::string>();
    }
    std::string response = inner_->chat(messages, json_mode);
    atomic_write_file(path, Json{{"response", response}}.dump());
    return response;
}

CachingT2I::CachingT2I(std::shared_ptr<T2IClient> inner, fs::path cache_root)
    : inner_(std::move(inner)), dir_(ensure_dir(std::move(cache_root), "t2i")) {}

ImageResult CachingT2I::generate(const T2IRequest& request) {
    Json key{{"model", request.model_id},
             {"prompt", request.prompt},
             {"width", request.width},
             {"height", request.height},
             {"sample_index", request.sample_index}};
    auto digest = sha256_hex(key.dump());
    auto png_path = dir_ / (digest + ".png");
    auto json_path = dir_ / (digest + ".json");

    if (fs::exists(png_path)) {
        hits_.fetch_add(1);
        return {read_file(png_path), request.model_id, false, ""};
    }
    if (auto entry = load_json_entry(json_path)) {
        hits_.fetch_add(1);
        return {"", entry->value("model", request.model_id), true, entry->value("reason", "")};
    }

    ImageResult result = inner_->generate(request);
    if (result.refused) {
        atomic_write_file(json_path, Json{{"refused", true},
                                          {"model", result.model_id},
                                          {"reason", result.refusal_reason}}
                                         .dump());
    } else {
        atomic_write_file(png_path, result.png_bytes);
    }
    return result;
}

CachingSearch::CachingSearch(std::shared_ptr<SearchClient> inner, fs::path cache_root)
    : inner_(std::move(inner)), dir_(ensure_dir(std::move(cache_root), "search")) {}

std::vector<SearchPassage> CachingSearch::search(const std::string& query) {
    auto path = dir_ / (sha256_hex(query) + ".json");
    if (auto entry = load_json_entry(path)) {
        hits_.fetch_add(1);
        std::vector<SearchPassage> passages;
        for (const auto& p : entry->at("passages")) {
            passages.push_back({p.value("url", ""), p.value("title", ""), p.value("text", "")});
        }
        return passages;
    }
    auto passages = inner_->search(query);
    Json stored{{"passages", Json::array()}};
    for (const auto& p : passages) {
        stored["passages"].push_back({{"url", p.url}, {"title", p.title}, {"text", p.text}});
    }
    atomic_write_file(path, stored.dump());
    return passages;
}

}  // namespace dofair
