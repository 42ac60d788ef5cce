#pragma once

#include <atomic>
#include <deque>
#include <map>
#include <mutex>

#include "dofair/clients.hpp"
#include "dofair/errors.hpp"

namespace dofair {

/// Mock images are a magic line followed by a JSON face list. Real PNG bytes
/// never start with this prefix, so misrouting surfaces as ParseError.
std::string encode_mock_image(const std::vector<FaceAnnotation>& faces);
std::vector<FaceAnnotation> decode_mock_image(const std::string& bytes);

/// Fixture-driven chat backend. Rules are (substring, response) pairs checked
/// in insertion order against the last user message; first match wins.
class ScriptedLlm : public LlmClient {
public:
    explicit ScriptedLlm(std::string model = kDefaultLlmModel) : model_(std::move(model)) {}

    void stub(std::string prompt_substring, std::string response);
    void set_fallback(std::string response) { fallback_ = std::move(response); }
    /// Next `count` calls throw `code` before rules apply again.
    void queue_error(Errc code, int count = 1);

    std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) override;
    std::string model_id() const override { return model_; }

    int calls() const { return calls_.load(); }
    std::vector<std::string> transcript() const;

private:
    std::string model_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::optional<std::string> fallback_;
    std::deque<Errc> pending_errors_;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
    std::vector<std::string> transcript_;
};

/// Emits mock-encoded images. Rules map a prompt substring to the face list
/// the "image" should contain; refusal rules simulate content policy.
class MockT2I : public T2IClient {
public:
    explicit MockT2I(std::string model = "mock-t2i") : model_(std::move(model)) {}

    void stub(std::string prompt_substring, std::vector<FaceAnnotation> faces);
    void stub_refusal(std::string prompt_substring, std::string reason);
    void set_default_faces(std::vector<FaceAnnotation> faces) { default_faces_ = std::move(faces); }

    ImageResult generate(const T2IRequest& request) override;

    int calls() const { return calls_.load(); }

private:
    std::string model_;
    std::vector<std::pair<std::string, std::vector<FaceAnnotation>>> rules_;
    std::vector<std::pair<std::string, std::string>> refusals_;
    std::vector<FaceAnnotation> default_faces_;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
};

/// Decodes mock images and applies the detection-confidence cutoff, mirroring
/// what the real adapter does after FairFace inference.
class MockClassifier : public FaceClassifier {
public:
    explicit MockClassifier(double confidence_cutoff = kFaceConfidenceCutoff)
        : cutoff_(confidence_cutoff) {}

    std::vector<FaceAnnotation> classify(const std::string& image_bytes) override;

    int calls() const { return calls_.load(); }

private:
    double cutoff_;
    std::atomic<int> calls_{0};
};

/// Exact-match query table. Unknown queries raise SearchUnavailable so fixture
/// gaps surface instead of silently producing empty evidence.
class MockSearch : public SearchClient {
public:
    void stub(std::string query, std::vector<SearchPassage> passages);
    void set_lenient(bool lenient) { lenient_ = lenient; }

    std::vector<SearchPassage> search(const std::string& query) override;

    int calls() const { return calls_.load(); }

private:
    std::map<std::string, std::vector<SearchPassage>> table_;
    bool lenient_ = false;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
};

/// Replays a recorded search snapshot. File format: JSONL, one object per
/// query: {"query": ..., "passages": [{"url","title","text"}, ...]}.
class SnapshotSearch : public SearchClient {
public:
    explicit SnapshotSearch(const std::string& snapshot_path);

    std::vector<SearchPassage> search(const std::string& query) override;

    int calls() const { return calls_.load(); }

private:
    std::map<std::string, std::vector<SearchPassage>> table_;
    std::atomic<int> calls_{0};
};

}  // namespace dofair
