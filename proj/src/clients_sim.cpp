#include "dofair/clients_sim.hpp"

#include <algorithm>
#include <random>

#include "dofair/clients_mock.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace {

std::string group_noun(Dim dim, bool plural) {
    if (dim == Dim::Race) return plural ? "racial groups" : "racial group";
    return plural ? "gender groups" : "gender group";
}

std::string join_labels(const LabelSet& set) {
    std::string out;
    for (const auto& label : set.to_strings()) {
        if (!out.empty()) out += ", ";
        out += label;
    }
    return out;
}

const DofairRecord* find_record(const std::vector<DofairRecord>& records,
                                const std::string& text) {
    for (const auto& r : records) {
        if (text.find(r.event_name) != std::string::npos) return &r;
    }
    return nullptr;
}

/// Reads a ", "-separated label list, stopping at the terminating period.
LabelSet parse_label_list(const std::string& text, size_t start, Dim dim) {
    auto end = text.find('.', start);
    if (end == std::string::npos) end = text.size();
    LabelSet set(dim);
    size_t pos = start;
    while (pos < end) {
        auto comma = text.find(", ", pos);
        auto item_end = (comma == std::string::npos || comma > end) ? end : comma;
        auto item = text.substr(pos, item_end - pos);
        if (!item.empty()) set.insert(item);
        pos = (item_end == end) ? end : item_end + 2;
    }
    return set;
}

std::vector<FaceAnnotation> faces_for(const LabelSet& involved, const LabelSet& dominant,
                                      Dim dim) {
    std::vector<FaceAnnotation> faces;
    int id = 0;
    for (const auto& label : involved.to_strings()) {
        int copies = dominant.contains(label) ? 2 : 1;
        for (int i = 0; i < copies; ++i) {
            FaceAnnotation f;
            f.face_id = id++;
            f.detection_confidence = 0.97;
            if (dim == Dim::Race) {
                f.race = label;
                f.gender = "Male";
            } else {
                f.race = "White";
                f.gender = label;
            }
            faces.push_back(std::move(f));
        }
    }
    return faces;
}

}  // namespace

std::string render_sim_knowledge(const DofairRecord& record) {
    Dim dim = record.dimension;
    std::string text = "Involved " + group_noun(dim, true) + ": " + join_labels(record.involved) +
                       ". Dominant " + group_noun(dim, false) + ": " +
                       join_labels(record.dominant) + ". Depict the " + record.role + " in " +
                       record.event_name + " with exactly this factual " +
                       (dim == Dim::Race ? std::string("racial") : std::string("gender")) +
                       " distribution.";
    return text;
}

std::optional<SimKnowledge> parse_sim_knowledge(const std::string& text, Dim dim) {
    const std::string involved_marker = "Involved " + group_noun(dim, true) + ": ";
    const std::string dominant_marker = "Dominant " + group_noun(dim, false) + ": ";
    auto ipos = text.find(involved_marker);
    auto dpos = text.find(dominant_marker);
    if (ipos == std::string::npos || dpos == std::string::npos) return std::nullopt;
    SimKnowledge k;
    k.involved = parse_label_list(text, ipos + involved_marker.size(), dim);
    k.dominant = parse_label_list(text, dpos + dominant_marker.size(), dim);
    return k;
}

SimulatedT2IClient::SimulatedT2IClient(std::vector<DofairRecord> records, uint64_t seed,
                                       std::string model)
    : records_(std::move(records)), seed_(seed), model_(std::move(model)) {}

ImageResult SimulatedT2IClient::generate(const T2IRequest& request) {
    calls_.fetch_add(1);
    const DofairRecord* record = find_record(records_, request.prompt);
    if (!record) {
        raise(Errc::BackendUnavailable,
              "simulated generator knows no event in prompt: " + request.prompt.substr(0, 120));
    }
    Dim dim = record->dimension;

    if (auto knowledge = parse_sim_knowledge(request.prompt, dim)) {
        // FAI instruction present: obey it exactly, no noise.
        auto faces = faces_for(knowledge->involved, knowledge->dominant, dim);
        return {encode_mock_image(faces), model_, false, ""};
    }

    bool intervened = request.prompt.find(" from diverse ") != std::string::npos ||
                      request.prompt.find("irrespective of") != std::string::npos;

    std::mt19937_64 rng(stable_hash64(request.prompt + "\x1f" +
                                      std::to_string(request.sample_index)) ^
                        seed_);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    LabelSet involved(dim);
    for (const auto& label : record->involved.to_strings()) {
        bool is_dominant = record->dominant.contains(label);
        if (is_dominant || coin(rng) >= kSimDropProb) involved.insert(label);
    }
    if (coin(rng) < kSimAddProb) {
        auto candidates = record->involved.complement().to_strings();
        if (!candidates.empty()) {
            std::shuffle(candidates.begin(), candidates.end(), rng);
            involved.insert(candidates.front());
        }
    }

    if (intervened && coin(rng) < kSimSpuriousProb) {
        auto missing = involved.complement().to_strings();
        if (!missing.empty()) {
            std::shuffle(missing.begin(), missing.end(), rng);
            size_t extra = 1 + (coin(rng) < 0.5 ? 1 : 0);
            for (size_t i = 0; i < extra && i < missing.size(); ++i) involved.insert(missing[i]);
        }
    }

    auto faces = faces_for(involved, record->dominant.intersect(involved), dim);
    return {encode_mock_image(faces), model_, false, ""};
}

SimKnowledgeLlm::SimKnowledgeLlm(std::vector<DofairRecord> records, std::string model)
    : records_(std::move(records)), model_(std::move(model)) {}

std::string SimKnowledgeLlm::chat(const std::vector<ChatMessage>& messages, bool) {
    calls_.fetch_add(1);
    std::string prompt;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") {
            prompt = it->content;
            break;
        }
    }
    const DofairRecord* record = find_record(records_, prompt);
    if (!record) {
        raise(Errc::UnparseableResponse,
              "knowledge question about an unknown event: " + prompt.substr(0, 120));
    }
    return render_sim_knowledge(*record);
}

}  // namespace dofair
