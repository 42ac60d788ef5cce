#pragma once

#include <atomic>
#include <optional>

#include "dofair/clients.hpp"
#include "dofair/record.hpp"

namespace dofair {

/// Noise policy for the simulated generator. Baseline draws the truth sets
/// with involvement noise; diversity-intervened draws additionally sprinkle
/// spurious labels, which is the effect under measurement.
inline constexpr double kSimDropProb = 0.25;      // involved non-dominant label omitted
inline constexpr double kSimAddProb = 0.15;       // draw depicts one uninvolved label
inline constexpr double kSimSpuriousProb = 0.6;   // intervened draw adds 1..2 extra labels

/// Canonical instruction grammar the simulated knowledge LLM emits and the
/// simulated generator obeys, e.g. "Involved racial groups: White, Black.
/// Dominant racial group: White. Depict the delegates in X with exactly this
/// factual racial distribution."
std::string render_sim_knowledge(const DofairRecord& record);

struct SimKnowledge {
    LabelSet involved{Dim::Race};
    LabelSet dominant{Dim::Race};
};

/// Parses the canonical grammar out of a prompt; nullopt when absent.
std::optional<SimKnowledge> parse_sim_knowledge(const std::string& text, Dim dim);

/// Emits mock-encoded images whose demographics follow the record truth plus
/// condition-dependent noise. The record is recognized by its event name
/// appearing in the prompt; the condition by its prompt markers.
class SimulatedT2IClient : public T2IClient {
public:
    SimulatedT2IClient(std::vector<DofairRecord> records, uint64_t seed,
                       std::string model = "sim-t2i");

    ImageResult generate(const T2IRequest& request) override;

    int calls() const { return calls_.load(); }

private:
    std::vector<DofairRecord> records_;
    uint64_t seed_;
    std::string model_;
    std::atomic<int> calls_{0};
};

/// Truth-aware chat backend for FAI knowledge steps: answers any distribution
/// question about a known event with the canonical instruction grammar.
class SimKnowledgeLlm : public LlmClient {
public:
    explicit SimKnowledgeLlm(std::vector<DofairRecord> records,
                             std::string model = "sim-knowledge");

    std::string chat(const std::vector<ChatMessage>& messages, bool json_mode) override;
    std::string model_id() const override { return model_; }

    int calls() const { return calls_.load(); }

private:
    std::vector<DofairRecord> records_;
    std::string model_;
    std::atomic<int> calls_{0};
};

}  // namespace dofair
