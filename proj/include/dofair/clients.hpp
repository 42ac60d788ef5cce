#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dofair/metrics.hpp"

namespace dofair {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

/// Chat-completion backend. Implementations must be reentrant; the
/// orchestrator multiplexes calls up to max_parallelism().
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) = 0;
    virtual std::string model_id() const = 0;
    virtual int max_parallelism() const { return 4; }
};

struct T2IRequest {
    std::string prompt;
    int width = 1024;
    int height = 1024;
    std::string model_id;
    /// Distinguishes repeated draws for the same prompt so caching and
    /// seeding stay per-image.
    int sample_index = 0;
};

struct ImageResult {
    std::string png_bytes;
    std::string model_id;
    bool refused = false;
    std::string refusal_reason;
};

class T2IClient {
public:
    virtual ~T2IClient() = default;
    virtual ImageResult generate(const T2IRequest& request) = 0;
    virtual int max_parallelism() const { return 2; }
};

/// Face detection plus per-face demographic attributes. Faces under the
/// detection-confidence cutoff are discarded by implementations.
class FaceClassifier {
public:
    virtual ~FaceClassifier() = default;
    virtual std::vector<FaceAnnotation> classify(const std::string& image_bytes) = 0;
    virtual int max_parallelism() const { return 1; }
};

inline constexpr double kFaceConfidenceCutoff = 0.9;

struct SearchPassage {
    std::string url;
    std::string title;
    std::string text;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    /// Up to 10 ranked passages; empty result is a valid answer.
    virtual std::vector<SearchPassage> search(const std::string& query) = 0;
    virtual int max_parallelism() const { return 4; }
};

using Sleeper = std::function<void(std::int64_t millis)>;

/// Wraps an LLM client with exponential backoff on RateLimited. AuthError and
/// other failures pass through untouched.
class RetryingLlm : public LlmClient {
public:
    RetryingLlm(std::shared_ptr<LlmClient> inner, int max_retries = 5, Sleeper sleeper = {});

    std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) override;
    std::string model_id() const override { return inner_->model_id(); }
    int max_parallelism() const override { return inner_->max_parallelism(); }

private:
    std::shared_ptr<LlmClient> inner_;
    int max_retries_;
    Sleeper sleeper_;
};

class RetryingSearch : public SearchClient {
public:
    RetryingSearch(std::shared_ptr<SearchClient> inner, int max_retries = 5, Sleeper sleeper = {});

    std::vector<SearchPassage> search(const std::string& query) override;
    int max_parallelism() const override { return inner_->max_parallelism(); }

private:
    std::shared_ptr<SearchClient> inner_;
    int max_retries_;
    Sleeper sleeper_;
};

inline constexpr const char* kDefaultLlmModel = "gpt-4o-2024-05-13";

}  // namespace dofair
