#pragma once

#include <stdexcept>
#include <string>

namespace dofair {

// Every failure mode the toolkit reports, across all modules.
enum class Errc {
    // dataset model
    InvalidLabel,
    EmptySet,
    SubsetViolation,
    MissingEvidence,
    DuplicateRecord,
    ParseError,
    EmptyBenchmark,
    // construction pipeline
    ConfigError,
    UnparseableResponse,
    SearchUnavailable,
    EmptyEvidence,
    AllAnswersNone,
    QuotaUnreachable,
    // evaluation engine
    DimensionMismatch,
    EmptyRun,
    // intervention library
    MissingKnowledge,
    UnknownCondition,
    LlmUnavailable,
    EmptyResponse,
    // clients
    RateLimited,
    AuthError,
    Timeout,
    ContentPolicyRejection,
    BackendUnavailable,
    PromptTooLong,
    ModelLoadError,
    // reporting
    KeyMismatch,
    EmptyInput,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidLabel: return "InvalidLabel";
        case Errc::EmptySet: return "EmptySet";
        case Errc::SubsetViolation: return "SubsetViolation";
        case Errc::MissingEvidence: return "MissingEvidence";
        case Errc::DuplicateRecord: return "DuplicateRecord";
        case Errc::ParseError: return "ParseError";
        case Errc::EmptyBenchmark: return "EmptyBenchmark";
        case Errc::ConfigError: return "ConfigError";
        case Errc::UnparseableResponse: return "UnparseableResponse";
        case Errc::SearchUnavailable: return "SearchUnavailable";
        case Errc::EmptyEvidence: return "EmptyEvidence";
        case Errc::AllAnswersNone: return "AllAnswersNone";
        case Errc::QuotaUnreachable: return "QuotaUnreachable";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyRun: return "EmptyRun";
        case Errc::MissingKnowledge: return "MissingKnowledge";
        case Errc::UnknownCondition: return "UnknownCondition";
        case Errc::LlmUnavailable: return "LlmUnavailable";
        case Errc::EmptyResponse: return "EmptyResponse";
        case Errc::RateLimited: return "RateLimited";
        case Errc::AuthError: return "AuthError";
        case Errc::Timeout: return "Timeout";
        case Errc::ContentPolicyRejection: return "ContentPolicyRejection";
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::PromptTooLong: return "PromptTooLong";
        case Errc::ModelLoadError: return "ModelLoadError";
        case Errc::KeyMismatch: return "KeyMismatch";
        case Errc::EmptyInput: return "EmptyInput";
    }
    return "UnknownError";
}

}  // namespace dofair
