#pragma once

#include <atomic>
#include <filesystem>

#include "dofair/clients.hpp"

namespace dofair {

/// Content-hash caches. Keys are sha256 over the full request (model id,
/// parameters, payload); entries live at <root>/<client>/<sha256>.json or
/// .png. Refusals are cached; transport errors are not, so retries still
/// happen on a rerun.
class CachingLlm : public LlmClient {
public:
    CachingLlm(std::shared_ptr<LlmClient> inner, std::filesystem::path cache_root);

    std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) override;
    std::string model_id() const override { return inner_->model_id(); }
    int max_parallelism() const override { return inner_->max_parallelism(); }

    int hits() const { return hits_; }

private:
    std::shared_ptr<LlmClient> inner_;
    std::filesystem::path dir_;
    std::atomic<int> hits_{0};
};

class CachingT2I : public T2IClient {
public:
    CachingT2I(std::shared_ptr<T2IClient> inner, std::filesystem::path cache_root);

    ImageResult generate(const T2IRequest& request) override;
    int max_parallelism() const override { return inner_->max_parallelism(); }

    int hits() const { return hits_; }

private:
    std::shared_ptr<T2IClient> inner_;
    std::filesystem::path dir_;
    std::atomic<int> hits_{0};
};

class CachingSearch : public SearchClient {
public:
    CachingSearch(std::shared_ptr<SearchClient> inner, std::filesystem::path cache_root);

    std::vector<SearchPassage> search(const std::string& query) override;
    int max_parallelism() const override { return inner_->max_parallelism(); }

    int hits() const { return hits_; }

private:
    std::shared_ptr<SearchClient> inner_;
    std::filesystem::path dir_;
    std::atomic<int> hits_{0};
};

}  // namespace dofair
