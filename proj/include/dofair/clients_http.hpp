#pragma once

#include "dofair/clients.hpp"

namespace dofair {

/// Hosted prompts above this length are rejected locally before any network
/// call; the image API caps prompts at 4000 characters.
inline constexpr size_t kHostedPromptLimit = 4000;

std::string env_or_throw(const char* name);

struct HostedConfig {
    std::string base_url;  // scheme + host, e.g. "https://api.openai.com"
    std::string api_key;
    int timeout_seconds = 60;
};

/// Chat-completions backend, OpenAI wire format.
class HostedLlm : public LlmClient {
public:
    HostedLlm(HostedConfig config, std::string model = kDefaultLlmModel);

    std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) override;
    std::string model_id() const override { return model_; }

private:
    HostedConfig config_;
    std::string model_;
};

/// Image-generations backend, OpenAI wire format, base64 response.
class HostedT2I : public T2IClient {
public:
    HostedT2I(HostedConfig config, std::string model = "dall-e-3");

    ImageResult generate(const T2IRequest& request) override;

private:
    HostedConfig config_;
    std::string model_;
};

/// Generic JSON search endpoint: POST {"q", "count"} with a bearer key,
/// expects {"results": [{"url","title","text"}]}. The concrete provider is
/// configured, not baked in.
class HostedSearch : public SearchClient {
public:
    explicit HostedSearch(HostedConfig config, std::string path = "/search");

    std::vector<SearchPassage> search(const std::string& query) override;

private:
    HostedConfig config_;
    std::string path_;
};

/// Runs an external classifier command: the image is written to a temp file,
/// the command is invoked with that path appended, and stdout must be a JSON
/// array of {"race","gender","confidence"} objects. Faces under the cutoff
/// are dropped here.
class SubprocessClassifier : public FaceClassifier {
public:
    explicit SubprocessClassifier(std::string command,
                                  double confidence_cutoff = kFaceConfidenceCutoff);

    std::vector<FaceAnnotation> classify(const std::string& image_bytes) override;

private:
    std::string command_;
    double cutoff_;
};

}  // namespace dofair
