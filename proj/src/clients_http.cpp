#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "dofair/clients_http.hpp"

#include <httplib.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "dofair/errors.hpp"
#include "dofair/jsonl.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace {

std::unique_ptr<httplib::Client> make_client(const HostedConfig& config) {
    auto client = std::make_unique<httplib::Client>(config.base_url);
    client->set_connection_timeout(config.timeout_seconds, 0);
    client->set_read_timeout(config.timeout_seconds, 0);
    client->set_bearer_token_auth(config.api_key);
    return client;
}

[[noreturn]] void raise_http(const httplib::Result& result, const char* what) {
    if (!result) {
        auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            raise(Errc::Timeout, std::string(what) + ": transport timeout");
        }
        raise(Errc::BackendUnavailable,
              std::string(what) + ": " + httplib::to_string(err));
    }
    int status = result->status;
    if (status == 401 || status == 403) {
        raise(Errc::AuthError, std::string(what) + ": HTTP " + std::to_string(status));
    }
    if (status == 429) {
        raise(Errc::RateLimited, std::string(what) + ": HTTP 429");
    }
    raise(Errc::BackendUnavailable,
          std::string(what) + ": HTTP " + std::to_string(status) + " " + result->body);
}

Json parse_body(const std::string& body, const char* what) {
    Json value = Json::parse(body, nullptr, false);
    if (value.is_discarded()) {
        raise(Errc::UnparseableResponse, std::string(what) + ": response is not JSON");
    }
    return value;
}

}  // namespace

std::string env_or_throw(const char* name) {
    const char* value = std::getenv(name);
    if (!value || !*value) {
        raise(Errc::AuthError, std::string("environment variable ") + name + " is not set");
    }
    return value;
}

HostedLlm::HostedLlm(HostedConfig config, std::string model)
    : config_(std::move(config)), model_(std::move(model)) {}

std::string HostedLlm::chat(const std::vector<ChatMessage>& messages, bool json_mode) {
    Json payload{{"model", model_}, {"messages", Json::array()}};
    for (const auto& m : messages) {
        payload["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    if (json_mode) payload["response_format"] = {{"type", "json_object"}};

    auto client = make_client(config_);
    auto result = client->Post("/v1/chat/completions", payload.dump(), "application/json");
    if (!result || result->status != 200) raise_http(result, "chat");

    Json body = parse_body(result->body, "chat");
    try {
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception&) {
        raise(Errc::UnparseableResponse, "chat: unexpected response shape");
    }
}

HostedT2I::HostedT2I(HostedConfig config, std::string model)
    : config_(std::move(config)), model_(std::move(model)) {}

ImageResult HostedT2I::generate(const T2IRequest& request) {
    if (request.prompt.size() > kHostedPromptLimit) {
        raise(Errc::PromptTooLong, "prompt is " + std::to_string(request.prompt.size()) +
                                       " chars; hosted limit is " +
                                       std::to_string(kHostedPromptLimit));
    }
    Json payload{{"model", request.model_id.empty() ? model_ : request.model_id},
                 {"prompt", request.prompt},
                 {"n", 1},
                 {"size", std::to_string(request.width) + "x" + std::to_string(request.height)},
                 {"response_format", "b64_json"}};

    auto client = make_client(config_);
    auto result = client->Post("/v1/images/generations", payload.dump(), "application/json");

    if (result && result->status == 400) {
        Json body = Json::parse(result->body, nullptr, false);
        if (!body.is_discarded()) {
            auto code = body.value("error", Json::object()).value("code", "");
            if (code == "content_policy_violation") {
                return {"", model_, true,
                        body["error"].value("message", "content policy rejection")};
            }
        }
    }
    if (!result || result->status != 200) raise_http(result, "generate");

    Json body = parse_body(result->body, "generate");
    try {
        auto b64 = body.at("data").at(0).at("b64_json").get<std::string>();
        return {base64_decode(b64), model_, false, ""};
    } catch (const Json::exception&) {
        raise(Errc::UnparseableResponse, "generate: unexpected response shape");
    }
}

HostedSearch::HostedSearch(HostedConfig config, std::string path)
    : config_(std::move(config)), path_(std::move(path)) {}

std::vector<SearchPassage> HostedSearch::search(const std::string& query) {
    Json payload{{"q", query}, {"count", 10}};
    auto client = make_client(config_);
    auto result = client->Post(path_, payload.dump(), "application/json");
    if (!result || result->status != 200) {
        if (result && (result->status == 401 || result->status == 403 || result->status == 429)) {
            raise_http(result, "search");
        }
        raise(Errc::SearchUnavailable,
              "search: " + (result ? "HTTP " + std::to_string(result->status)
                                   : httplib::to_string(result.error())));
    }
    Json body = parse_body(result->body, "search");
    std::vector<SearchPassage> passages;
    for (const auto& item : body.value("results", Json::array())) {
        passages.push_back({item.value("url", ""), item.value("title", ""),
                            item.value("text", "")});
        if (passages.size() == 10) break;
    }
    return passages;
}

SubprocessClassifier::SubprocessClassifier(std::string command, double confidence_cutoff)
    : command_(std::move(command)), cutoff_(confidence_cutoff) {}

std::vector<FaceAnnotation> SubprocessClassifier::classify(const std::string& image_bytes) {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path();
    auto path = dir / ("dofair_face_" + sha256_hex(image_bytes).substr(0, 16) + ".png");
    atomic_write_file(path, image_bytes);

    std::string cmd = command_ + " " + path.string();
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) raise(Errc::ModelLoadError, "could not launch classifier: " + command_);
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = pclose(pipe);
    std::error_code ec;
    fs::remove(path, ec);
    if (status != 0) {
        raise(Errc::ModelLoadError,
              "classifier exited with status " + std::to_string(status) + ": " + output);
    }

    Json faces = Json::parse(output, nullptr, false);
    if (faces.is_discarded() || !faces.is_array()) {
        raise(Errc::ParseError, "classifier output is not a JSON array");
    }
    std::vector<FaceAnnotation> kept;
    int id = 0;
    for (const auto& f : faces) {
        FaceAnnotation face;
        face.face_id = id++;
        face.race = f.value("race", "");
        face.gender = f.value("gender", "");
        face.detection_confidence = f.value("confidence", 1.0);
        if (face.detection_confidence >= cutoff_) kept.push_back(std::move(face));
    }
    return kept;
}

}  // namespace dofair
