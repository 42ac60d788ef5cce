#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dofair/clients_mock.hpp"
#include "dofair/knowledge.hpp"
#include "helpers.hpp"

using namespace dofair;
using testutil::record_with;

namespace {

EvidenceSet evidence_with(std::vector<DocumentChunk> chunks) {
    EvidenceSet evidence;
    evidence.queries.push_back({QueryKind::Dominant, "q", std::move(chunks)});
    return evidence;
}

}  // namespace

TEST_CASE("verbalized knowledge fills the question and returns the instruction") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    ScriptedLlm llm;
    llm.stub("racial distribution of the people in Test Event",
             "Depict 7 White people to reflect the factual racial distribution.");
    auto instruction = verbalize_knowledge(record, llm);
    CHECK(instruction == "Depict 7 White people to reflect the factual racial distribution.");

    auto transcript = llm.transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0] ==
          "What will be the racial distribution of the people in Test Event in history? "
          "Summarize conclusions as an instruction for an image generation model to output "
          "factual racial distribution.");
}

TEST_CASE("gender records ask the gender variant") {
    auto record = record_with(Dim::Gender, "Test Event", "attendees", {"Female"}, {"Female"});
    ScriptedLlm llm;
    llm.set_fallback("Depict the attendees as entirely female.");
    verbalize_knowledge(record, llm);
    auto transcript = llm.transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0].find("gender distribution of the attendees in Test Event") !=
          std::string::npos);
    CHECK(transcript[0].find('{') == std::string::npos);
}

TEST_CASE("a whitespace-only instruction is rejected") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    ScriptedLlm llm;
    llm.set_fallback("  \n\t  ");
    try {
        verbalize_knowledge(record, llm);
        FAIL("blank instruction accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyResponse);
    }
}

TEST_CASE("an unavailable backend surfaces as LlmUnavailable") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    ScriptedLlm llm;
    llm.queue_error(Errc::BackendUnavailable, 1);
    try {
        verbalize_knowledge(record, llm);
        FAIL("backend failure swallowed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::LlmUnavailable);
    }
}

TEST_CASE("retrieved knowledge embeds the chunks and records their ids") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    auto evidence = evidence_with({{"https://en.wikipedia.org/wiki/A", "First chunk text.", 0},
                                   {"https://en.wikipedia.org/wiki/B", "Second chunk text.", 1}});
    ScriptedLlm llm;
    llm.stub("Based on the information", "Depict everyone as White.");

    auto knowledge = summarize_retrieved_knowledge(record, evidence, llm);
    CHECK(knowledge.instruction == "Depict everyone as White.");
    CHECK(knowledge.doc_ids == std::vector<std::string>{"https://en.wikipedia.org/wiki/A",
                                                        "https://en.wikipedia.org/wiki/B"});

    auto transcript = llm.transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0].find("Supporting Documents: First chunk text. Second chunk text. Think "
                             "step by step.") != std::string::npos);
    CHECK(transcript[0].find("racial distribution of the people in Test Event") !=
          std::string::npos);
    CHECK(transcript[0].find("{documents}") == std::string::npos);
}

TEST_CASE("no evidence chunks means no retrieved knowledge") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    ScriptedLlm llm;
    llm.set_fallback("unused");
    try {
        summarize_retrieved_knowledge(record, EvidenceSet{}, llm);
        FAIL("empty evidence accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyEvidence);
    }
}

TEST_CASE("at most fifteen chunks reach the question") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    std::vector<DocumentChunk> chunks;
    for (int i = 0; i < 20; ++i) {
        chunks.push_back({"https://en.wikipedia.org/wiki/" + std::to_string(i),
                          "chunk " + std::to_string(i), i});
    }
    ScriptedLlm llm;
    llm.set_fallback("instruction");
    auto knowledge = summarize_retrieved_knowledge(record, evidence_with(std::move(chunks)), llm);
    CHECK(knowledge.doc_ids.size() == 15);
    CHECK(knowledge.doc_ids.front() == "https://en.wikipedia.org/wiki/0");
    CHECK(knowledge.doc_ids.back() == "https://en.wikipedia.org/wiki/14");
}

TEST_CASE("whole chunks drop from the tail once the question would overflow") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    std::vector<DocumentChunk> chunks;
    for (int i = 0; i < 3; ++i) {
        chunks.push_back({"https://en.wikipedia.org/wiki/" + std::to_string(i),
                          std::string(1300, static_cast<char>('a' + i)), i});
    }
    ScriptedLlm llm;
    llm.set_fallback("instruction");
    auto knowledge = summarize_retrieved_knowledge(record, evidence_with(std::move(chunks)), llm);
    REQUIRE(knowledge.doc_ids.size() == 2);

    auto transcript = llm.transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0].size() <= kKnowledgeCharBudget);
    CHECK(transcript[0].find(std::string(1300, 'a')) != std::string::npos);
    CHECK(transcript[0].find(std::string(1300, 'b')) != std::string::npos);
    CHECK(transcript[0].find(std::string(10, 'c')) == std::string::npos);
}

TEST_CASE("a single oversized chunk is clipped instead of dropped") {
    auto record = record_with(Dim::Race, "Test Event", "people", {"White"}, {"White"});
    auto evidence =
        evidence_with({{"https://en.wikipedia.org/wiki/Huge", std::string(6000, 'x'), 0}});
    ScriptedLlm llm;
    llm.set_fallback("instruction");
    auto knowledge = summarize_retrieved_knowledge(record, evidence, llm);
    CHECK(knowledge.doc_ids == std::vector<std::string>{"https://en.wikipedia.org/wiki/Huge"});

    auto transcript = llm.transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0].find(std::string(kKnowledgeCharBudget / 2, 'x')) != std::string::npos);
    CHECK(transcript[0].find(std::string(kKnowledgeCharBudget / 2 + 1, 'x')) ==
          std::string::npos);
}
