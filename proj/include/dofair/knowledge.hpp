#pragma once

#include "dofair/clients.hpp"
#include "dofair/conditions.hpp"
#include "dofair/evidence.hpp"
#include "dofair/record.hpp"

namespace dofair {

/// One LLM call asking for a factual-distribution instruction, no documents.
/// The returned instruction text is appended to the generation prompt.
std::string verbalize_knowledge(const DofairRecord& record, LlmClient& llm);

struct RetrievedKnowledge {
    std::string instruction;
    std::vector<std::string> doc_ids;  // urls of the chunks actually shown
};

/// Document budget for the retrieved-knowledge question: at most 15 chunks,
/// and whole chunks are dropped from the tail until the rendered question
/// fits the hosted prompt limit.
inline constexpr int kKnowledgeMaxChunks = 15;
inline constexpr size_t kKnowledgeCharBudget = 4000;

/// One LLM call over the retrieved chunks; returns the instruction plus the
/// ids of the documents that made it into the question.
RetrievedKnowledge summarize_retrieved_knowledge(const DofairRecord& record,
                                                 const EvidenceSet& evidence, LlmClient& llm);

}  // namespace dofair
