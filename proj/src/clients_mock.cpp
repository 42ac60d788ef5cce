#include "dofair/clients_mock.hpp"

#include "dofair/jsonl.hpp"

namespace dofair {

namespace {

constexpr std::string_view kMockImageMagic = "DFAIMG1\n";

const std::string& last_user_content(const std::vector<ChatMessage>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") return it->content;
    }
    raise(Errc::EmptyInput, "chat called without a user message");
}

}  // namespace

std::string encode_mock_image(const std::vector<FaceAnnotation>& faces) {
    Json arr = Json::array();
    for (const auto& f : faces) {
        arr.push_back({{"race", f.race},
                       {"gender", f.gender},
                       {"confidence", f.detection_confidence}});
    }
    return std::string(kMockImageMagic) + arr.dump();
}

std::vector<FaceAnnotation> decode_mock_image(const std::string& bytes) {
    if (bytes.rfind(kMockImageMagic, 0) != 0) {
        raise(Errc::ParseError, "not a mock image payload");
    }
    Json arr = Json::parse(bytes.substr(kMockImageMagic.size()), nullptr, false);
    if (arr.is_discarded() || !arr.is_array()) {
        raise(Errc::ParseError, "mock image payload is not a JSON array");
    }
    std::vector<FaceAnnotation> faces;
    int next_id = 0;
    for (const auto& item : arr) {
        FaceAnnotation f;
        f.face_id = next_id++;
        f.race = item.value("race", "");
        f.gender = item.value("gender", "");
        f.detection_confidence = item.value("confidence", 1.0);
        faces.push_back(std::move(f));
    }
    return faces;
}

void ScriptedLlm::stub(std::string prompt_substring, std::string response) {
    std::lock_guard lock(mu_);
    rules_.emplace_back(std::move(prompt_substring), std::move(response));
}

void ScriptedLlm::queue_error(Errc code, int count) {
    std::lock_guard lock(mu_);
    for (int i = 0; i < count; ++i) pending_errors_.push_back(code);
}

std::string ScriptedLlm::chat(const std::vector<ChatMessage>& messages, bool) {
    calls_.fetch_add(1);
    const std::string& prompt = last_user_content(messages);
    std::lock_guard lock(mu_);
    transcript_.push_back(prompt);
    if (!pending_errors_.empty()) {
        Errc code = pending_errors_.front();
        pending_errors_.pop_front();
        raise(code, "scripted failure");
    }
    for (const auto& [needle, response] : rules_) {
        if (prompt.find(needle) != std::string::npos) return response;
    }
    if (fallback_) return *fallback_;
    raise(Errc::UnparseableResponse,
          "no scripted response matches prompt: " + prompt.substr(0, 120));
}

std::vector<std::string> ScriptedLlm::transcript() const {
    std::lock_guard lock(mu_);
    return transcript_;
}

void MockT2I::stub(std::string prompt_substring, std::vector<FaceAnnotation> faces) {
    std::lock_guard lock(mu_);
    rules_.emplace_back(std::move(prompt_substring), std::move(faces));
}

void MockT2I::stub_refusal(std::string prompt_substring, std::string reason) {
    std::lock_guard lock(mu_);
    refusals_.emplace_back(std::move(prompt_substring), std::move(reason));
}

ImageResult MockT2I::generate(const T2IRequest& request) {
    calls_.fetch_add(1);
    std::lock_guard lock(mu_);
    for (const auto& [needle, reason] : refusals_) {
        if (request.prompt.find(needle) != std::string::npos) {
            return {"", model_, true, reason};
        }
    }
    for (const auto& [needle, faces] : rules_) {
        if (request.prompt.find(needle) != std::string::npos) {
            return {encode_mock_image(faces), model_, false, ""};
        }
    }
    return {encode_mock_image(default_faces_), model_, false, ""};
}

std::vector<FaceAnnotation> MockClassifier::classify(const std::string& image_bytes) {
    calls_.fetch_add(1);
    if (image_bytes.empty()) return {};
    auto faces = decode_mock_image(image_bytes);
    std::vector<FaceAnnotation> kept;
    for (auto& f : faces) {
        if (f.detection_confidence >= cutoff_) kept.push_back(std::move(f));
    }
    return kept;
}

void MockSearch::stub(std::string query, std::vector<SearchPassage> passages) {
    std::lock_guard lock(mu_);
    table_[std::move(query)] = std::move(passages);
}

std::vector<SearchPassage> MockSearch::search(const std::string& query) {
    calls_.fetch_add(1);
    std::lock_guard lock(mu_);
    if (auto it = table_.find(query); it != table_.end()) return it->second;
    if (lenient_) return {};
    raise(Errc::SearchUnavailable, "no stubbed result for query: " + query);
}

SnapshotSearch::SnapshotSearch(const std::string& snapshot_path) {
    for (const auto& line : read_jsonl(snapshot_path)) {
        std::vector<SearchPassage> passages;
        for (const auto& p : line.value.at("passages")) {
            passages.push_back({p.value("url", ""), p.value("title", ""), p.value("text", "")});
        }
        table_[line.value.at("query").get<std::string>()] = std::move(passages);
    }
}

std::vector<SearchPassage> SnapshotSearch::search(const std::string& query) {
    calls_.fetch_add(1);
    if (auto it = table_.find(query); it != table_.end()) return it->second;
    raise(Errc::SearchUnavailable, "query missing from snapshot: " + query);
}

}  // namespace dofair
