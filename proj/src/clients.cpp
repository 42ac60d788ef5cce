#include "dofair/clients.hpp"

#include <thread>

#include "dofair/errors.hpp"

namespace dofair {

namespace {

Sleeper default_sleeper() {
    return [](std::int64_t millis) {
        std::this_thread::sleep_for(std::chrono::milliseconds(millis));
    };
}

/// 500ms, 1s, 2s, ... capped at 16s.
std::int64_t backoff_millis(int attempt) {
    std::int64_t ms = 500;
    for (int i = 0; i < attempt && ms < 16000; ++i) ms *= 2;
    return ms < 16000 ? ms : 16000;
}

}  // namespace

RetryingLlm::RetryingLlm(std::shared_ptr<LlmClient> inner, int max_retries, Sleeper sleeper)
    : inner_(std::move(inner)),
      max_retries_(max_retries),
      sleeper_(sleeper ? std::move(sleeper) : default_sleeper()) {}

std::string RetryingLlm::chat(const std::vector<ChatMessage>& messages, bool json_mode) {
    for (int attempt = 0;; ++attempt) {
        try {
            return inner_->chat(messages, json_mode);
        } catch (const Error& e) {
            if (e.code() != Errc::RateLimited || attempt >= max_retries_) throw;
            sleeper_(backoff_millis(attempt));
        }
    }
}

RetryingSearch::RetryingSearch(std::shared_ptr<SearchClient> inner, int max_retries,
                               Sleeper sleeper)
    : inner_(std::move(inner)),
      max_retries_(max_retries),
      sleeper_(sleeper ? std::move(sleeper) : default_sleeper()) {}

std::vector<SearchPassage> RetryingSearch::search(const std::string& query) {
    for (int attempt = 0;; ++attempt) {
        try {
            return inner_->search(query);
        } catch (const Error& e) {
            bool retryable = e.code() == Errc::RateLimited || e.code() == Errc::SearchUnavailable;
            if (!retryable || attempt >= max_retries_) throw;
            sleeper_(backoff_millis(attempt));
        }
    }
}

}  // namespace dofair
