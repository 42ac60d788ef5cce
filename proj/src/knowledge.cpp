#include "dofair/knowledge.hpp"

#include "dofair/util.hpp"

namespace dofair {

namespace {

std::string fill(std::string text, const DofairRecord& record) {
    text = replace_all(std::move(text), "{group}", record.role);
    text = replace_all(std::move(text), "{event}", record.event_name);
    return text;
}

std::string chat_for_instruction(LlmClient& llm, const std::string& prompt) {
    std::string instruction;
    try {
        instruction = llm.chat({{"user", prompt}}, false);
    } catch (const Error& e) {
        if (e.code() == Errc::BackendUnavailable) {
            raise(Errc::LlmUnavailable, e.what());
        }
        throw;
    }
    if (instruction.find_first_not_of(" \t\r\n") == std::string::npos) {
        raise(Errc::EmptyResponse, "knowledge model returned no instruction");
    }
    return instruction;
}

}  // namespace

std::string verbalize_knowledge(const DofairRecord& record, LlmClient& llm) {
    return chat_for_instruction(llm,
                                fill(templates::fai_vk_prompt(record.dimension), record));
}

RetrievedKnowledge summarize_retrieved_knowledge(const DofairRecord& record,
                                                 const EvidenceSet& evidence, LlmClient& llm) {
    auto chunks = evidence.all_chunks();
    if (chunks.empty()) {
        raise(Errc::EmptyEvidence, "retrieved knowledge needs evidence chunks");
    }
    if (chunks.size() > static_cast<size_t>(kKnowledgeMaxChunks)) {
        chunks.resize(kKnowledgeMaxChunks);
    }

    std::string frame = fill(templates::fai_rk_prompt(record.dimension), record);
    RetrievedKnowledge out;
    std::string documents;
    for (const auto& chunk : chunks) {
        std::string addition = documents.empty() ? chunk.text : " " + chunk.text;
        if (frame.size() - std::string_view("{documents}").size() + documents.size() +
                addition.size() >
            kKnowledgeCharBudget) {
            if (documents.empty()) {
                // A single oversized chunk still has to go through, clipped.
                addition = chunk.text.substr(0, kKnowledgeCharBudget / 2);
            } else {
                break;
            }
        }
        documents += addition;
        out.doc_ids.push_back(chunk.url);
    }

    out.instruction = chat_for_instruction(
        llm, replace_all(std::move(frame), "{documents}", documents));
    return out;
}

}  // namespace dofair
