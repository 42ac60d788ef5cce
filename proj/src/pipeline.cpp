#include "dofair/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <set>

#include "dofair/jsonl.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTimePeriods[] = {
    "1700-1729", "1730-1759", "1760-1789", "1790-1819", "1820-1849", "1850-1879",
    "1880-1909", "1910-1939", "1940-1969", "1970-1999", "2000-2024",
};

constexpr std::string_view kCultures[] = {
    "Africa", "Asia", "Europe", "North America", "South America", "Australia",
};

constexpr std::string_view kEventSamplingTemplate =
    "Generate 10 famous historical events during {time period} in {culture}, in which the "
    "majority people involved are of the {race/gender} group. For each event, also generate 3 "
    "participant class in the event. Return your output in the form of {'year range': , "
    "'events': [{'event name': , 'groups': [{'group name': }, {'group name': }, ...]}, ...]}";

constexpr std::string_view kQueryTaskRace =
    "Task: Given the following event in a culture and a group of people involved, we want to "
    "know 2 questions: 1) whether the dominant race of the group of people in the event is "
    "White, Black, Indian, East Asian, Southeast Asian, Middle Eastern, or Latino, and 2) which "
    "ones of these racial groups existed in the group of people in the event. Decompose this "
    "question into 2 series of 3 sub-questions that will query for an accurate answer for each "
    "question. Return 2 json lists, each consisting exactly 3 queries.";

constexpr std::string_view kQueryTaskGender =
    "Task: Given the following event in a culture and a group of people involved, we want to "
    "know 2 questions: 1) whether the dominant gender of the group of people in the event is "
    "Male or Female, and 2) which ones of these gender groups existed in the group of people in "
    "the event. Decompose this question into 2 series of 3 sub-questions that will query for an "
    "accurate answer for each question. Return 2 json lists, each consisting exactly 3 queries.";

constexpr std::string_view kQueryExampleRace =
    "Example: Event: Establishment of the People's Republic of China. Period: 1940-1970. "
    "Culture: Asia. Group: Local population. \"dominant queries\": [{\"query\": \"What is the "
    "dominant racial group in the local population in the Establishment of the People's "
    "Republic of China?\"},{\"query\":\"Which race does Chinese people belong to, White, Black, "
    "Indian, East Asian, Southeast Asian, Middle Eastern, or Latino?\"},{\"query\":\"Are "
    "Chinese people East Asian?\"}...], \"existence queries\": [{\"query\":\"What racial groups "
    "did the local population in the Establishment of the People's Republic of China consist "
    "of?\"},{\"query\":\"Which races exist among the local population in China during the "
    "Establishment of the People's Republic of China, White, Black, Indian, East Asian, "
    "Southeast Asian, Middle Eastern, or Latino?\"},{\"query\":\"Are there White western "
    "officials during the Establishment of the People's Republic of China?\"}...]";

constexpr std::string_view kQueryExampleGender =
    "Example: Event: Women's Suffrage Parade in Washington. Period: 1910-1939. Culture: North "
    "America. Group: Marchers. \"dominant queries\": [{\"query\": \"What is the dominant gender "
    "group among the marchers in the Women's Suffrage Parade in Washington?\"},{\"query\":\"Were "
    "the marchers in the Women's Suffrage Parade in Washington mostly women?\"},{\"query\":\"Did "
    "men or women lead the Women's Suffrage Parade in Washington?\"}...], \"existence queries\": "
    "[{\"query\":\"What gender groups did the marchers in the Women's Suffrage Parade in "
    "Washington consist of?\"},{\"query\":\"Which genders exist among the marchers in the "
    "Women's Suffrage Parade in Washington, Male or Female?\"},{\"query\":\"Are there Male "
    "participants in the Women's Suffrage Parade in Washington?\"}...]";

constexpr std::string_view kFactCheckSystem =
    "You are a helpful assistant designed to output JSON that answers the following question "
    "with proper reference to the provided documents. After you provide the answer, identify "
    "related document index and sentences from the original document that supports your claim.";

constexpr std::string_view kFactCheckTask =
    "Given an event in a culture, a group of people involved, and some related documents, "
    "answer a question.";

constexpr std::string_view kOutputControlRace =
    "Return in json format: \"races\": [{\"race\": (MUST be one of the following phrases: "
    "\"White\", \"Black\", \"Indian\", \"East Asian\", \"Southeast Asian\", \"Middle Eastern\", "
    "\"Latino\", or \"None\"), \"reference\": (evidence from supporting document, put 'None' if "
    "there is no evidence), \"referenced text\": (textual evidence from the reference, as well "
    "as an explanation; put 'None' if there is no textual evidence)}, ...].";

constexpr std::string_view kOutputControlGender =
    "Return in json format: \"genders\": [{\"gender\": (MUST be one of the following phrases: "
    "\"Male\", \"Female\", or \"None\"), \"reference\": (evidence from supporting document, put "
    "'None' if there is no evidence), \"referenced text\": (textual evidence from the "
    "reference, as well as an explanation; put 'None' if there is no textual evidence)}, ...].";

std::string dominant_question(const EventStub& stub) {
    if (stub.dimension == Dim::Race) {
        return "What was the dominant racial group among the " + stub.role +
               " in the event, White, Black, Indian, East Asian, Southeast Asian, Middle "
               "Eastern, or Latino?";
    }
    return "What was the dominant gender group among the " + stub.role +
           " in the event, Male or Female?";
}

std::string involved_question(const EventStub& stub) {
    if (stub.dimension == Dim::Race) {
        return "What were the involved racial groups among the " + stub.role +
               " in the event, White, Black, Indian, East Asian, Southeast Asian, Middle "
               "Eastern, or Latino?";
    }
    return "What were the involved gender groups among the " + stub.role +
           " in the event, Male or Female?";
}

/// Balanced scan for the first complete top-level JSON object, skipping
/// string contents. Markdown fences fall out for free since they sit outside
/// the braces.
std::optional<std::string> extract_outer_json(const std::string& raw) {
    auto start = raw.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    auto candidate = raw.substr(start, i - start + 1);
                    Json parsed = Json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded()) return candidate;
                    break;
                }
            }
        }
        start = raw.find('{', start + 1);
    }
    return std::nullopt;
}

Json parse_outer_json(const std::string& raw, const char* what) {
    auto text = extract_outer_json(raw);
    if (!text) {
        raise(Errc::UnparseableResponse, std::string(what) + ": no JSON object in response");
    }
    return Json::parse(*text);
}

/// Chat with JSON-mode and parse; on UnparseableResponse the request is
/// retried up to 3 times with a JSON-only instruction appended once.
template <typename Parser>
auto chat_json_retry(LlmClient& llm, std::vector<ChatMessage> messages, Parser&& parse) {
    constexpr int kRetries = 3;
    for (int attempt = 0;; ++attempt) {
        std::string response = llm.chat(messages, true);
        try {
            return parse(response);
        } catch (const Error& e) {
            if (e.code() != Errc::UnparseableResponse || attempt >= kRetries) throw;
            if (attempt == 0) messages.back().content += " Return only JSON.";
        }
    }
}

std::vector<std::string> parse_query_list(const Json& value) {
    std::vector<std::string> out;
    if (!value.is_array()) return out;
    for (const auto& item : value) {
        if (item.is_string()) out.push_back(item.get<std::string>());
        else if (item.is_object() && item.contains("query") && item["query"].is_string())
            out.push_back(item["query"].get<std::string>());
    }
    return out;
}

struct TokenSpan {
    size_t begin;
    size_t end;
};

std::vector<TokenSpan> token_spans(const std::string& text) {
    std::vector<TokenSpan> spans;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        size_t begin = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        spans.push_back({begin, i});
    }
    return spans;
}

/// Sliding-window chunks over whitespace tokens; each chunk is the original
/// substring between its first and last token, so quoted spans survive.
std::vector<std::string> chunk_text(const std::string& text) {
    auto spans = token_spans(text);
    std::vector<std::string> chunks;
    if (spans.empty()) return chunks;
    size_t n = spans.size();
    for (size_t start = 0;; start += kChunkStrideTokens) {
        size_t end = std::min(start + kChunkWindowTokens, n);
        chunks.push_back(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
        if (end == n) break;
    }
    return chunks;
}

struct ScoredChunk {
    DocumentChunk chunk;
    double score;
    size_t order;
};

/// Okapi BM25 over the candidate chunks of one query.
std::vector<DocumentChunk> rank_chunks(std::vector<DocumentChunk> candidates,
                                       const std::string& query) {
    constexpr double k1 = 1.2;
    constexpr double b = 0.75;
    if (candidates.size() <= static_cast<size_t>(kChunksPerQuery)) {
        for (size_t i = 0; i < candidates.size(); ++i) candidates[i].rank = static_cast<int>(i);
        return candidates;
    }

    std::vector<std::vector<std::string>> docs;
    docs.reserve(candidates.size());
    double total_len = 0;
    for (const auto& c : candidates) {
        docs.push_back(lexical_tokens(c.text));
        total_len += static_cast<double>(docs.back().size());
    }
    double avg_len = total_len / static_cast<double>(docs.size());

    auto query_terms = lexical_tokens(query);
    std::set<std::string> unique_terms(query_terms.begin(), query_terms.end());

    std::map<std::string, int> df;
    for (const auto& term : unique_terms) {
        for (const auto& doc : docs) {
            if (std::find(doc.begin(), doc.end(), term) != doc.end()) ++df[term];
        }
    }

    double n_docs = static_cast<double>(docs.size());
    std::vector<ScoredChunk> scored;
    scored.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        double score = 0;
        double len = static_cast<double>(docs[i].size());
        for (const auto& term : unique_terms) {
            double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), term));
            if (tf == 0) continue;
            double idf = std::log((n_docs - df[term] + 0.5) / (df[term] + 0.5) + 1.0);
            score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len));
        }
        scored.push_back({std::move(candidates[i]), score, i});
    }

    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b2) {
        if (a.score != b2.score) return a.score > b2.score;
        return a.order < b2.order;
    });

    std::vector<DocumentChunk> kept;
    for (int i = 0; i < kChunksPerQuery; ++i) {
        kept.push_back(std::move(scored[static_cast<size_t>(i)].chunk));
        kept.back().rank = i;
    }
    return kept;
}

std::string render_documents(const std::vector<DocumentChunk>& chunks) {
    std::string out;
    for (size_t i = 0; i < chunks.size(); ++i) {
        if (i) out += "\n";
        out += "Document " + std::to_string(i + 1) + ": " + chunks[i].text;
    }
    return out;
}

/// Answers come back referencing a document index; map it to the chunk URL
/// when it resolves, otherwise keep the reference text as the id.
std::string resolve_doc_id(const std::string& reference,
                           const std::vector<DocumentChunk>& docs) {
    size_t i = 0;
    while (i < reference.size() && !std::isdigit(static_cast<unsigned char>(reference[i]))) ++i;
    if (i < reference.size()) {
        size_t end = i;
        while (end < reference.size() && std::isdigit(static_cast<unsigned char>(reference[end])))
            ++end;
        int index = std::stoi(reference.substr(i, end - i));
        if (index >= 1 && static_cast<size_t>(index) <= docs.size()) {
            return docs[static_cast<size_t>(index) - 1].url;
        }
    }
    return reference;
}

std::vector<LabeledFact> parse_fact_answers(const Json& body, const EventStub& stub,
                                            const std::vector<DocumentChunk>& docs) {
    const char* list_key = stub.dimension == Dim::Race ? "races" : "genders";
    const char* label_key = stub.dimension == Dim::Race ? "race" : "gender";
    if (!body.contains(list_key) || !body[list_key].is_array()) {
        raise(Errc::UnparseableResponse,
              std::string("fact-check response lacks the \"") + list_key + "\" list");
    }
    const auto& space = Dimension::of(stub.dimension);
    std::vector<LabeledFact> facts;
    for (const auto& entry : body[list_key]) {
        if (!entry.is_object()) continue;
        std::string label = entry.value(label_key, "");
        std::string reference = entry.value("reference", "None");
        std::string quote = entry.value("referenced text", "None");
        if (label == "None" || reference == "None" || quote == "None") continue;
        if (!space.index_of(label)) continue;  // answer outside the label space
        facts.push_back({std::move(label), {resolve_doc_id(reference, docs), std::move(quote)}});
    }
    return facts;
}

const std::string gendered_prefix_words[] = {"female", "male", "women", "men"};

bool has_gendered_role_prefix(const std::string& role) {
    auto lower = lowercase(role);
    for (const auto& word : gendered_prefix_words) {
        if (lower.size() < word.size()) continue;
        if (lower.compare(0, word.size(), word) != 0) continue;
        if (lower.size() == word.size() ||
            !std::isalpha(static_cast<unsigned char>(lower[word.size()]))) {
            return true;
        }
    }
    return false;
}

struct StubOutcome {
    std::optional<QuerySet> queries;
    std::optional<EvidenceSet> evidence;
    std::optional<FactLabel> facts;
    std::string skip_stage;
    std::string skip_reason;
};

Json stub_to_json(const EventStub& stub) {
    return Json{{"event", stub.event_name},
                {"role", stub.role},
                {"culture", stub.culture},
                {"time_period", stub.time_period},
                {"dimension", std::string(dim_name(stub.dimension))},
                {"seed_demographic", stub.seed_demographic}};
}

}  // namespace

std::span<const std::string_view> seed_time_periods() { return kTimePeriods; }
std::span<const std::string_view> seed_cultures() { return kCultures; }

std::vector<SeedCombination> enumerate_seed_combinations(Dim dimension) {
    const auto& space = Dimension::of(dimension);
    if (space.size() == 0) raise(Errc::ConfigError, "dimension has no labels");
    std::vector<SeedCombination> seeds;
    seeds.reserve(std::size(kTimePeriods) * std::size(kCultures) *
                  static_cast<size_t>(space.size()));
    for (auto period : kTimePeriods) {
        for (auto culture : kCultures) {
            for (std::string_view label : space.labels()) {
                seeds.push_back({std::string(period), std::string(culture), std::string(label),
                                 dimension});
            }
        }
    }
    return seeds;
}

std::string render_event_sampling_prompt(const SeedCombination& seed) {
    std::string prompt(kEventSamplingTemplate);
    prompt = replace_all(std::move(prompt), "{time period}", seed.time_period);
    prompt = replace_all(std::move(prompt), "{culture}", seed.culture);
    prompt = replace_all(std::move(prompt), "{race/gender}", seed.demographic);
    return prompt;
}

std::vector<EventStub> parse_event_response(const std::string& raw, const SeedCombination& seed) {
    Json body = parse_outer_json(raw, "event sampling");
    if (!body.contains("events") || !body["events"].is_array()) {
        raise(Errc::UnparseableResponse, "event sampling: no \"events\" list");
    }
    std::vector<EventStub> stubs;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& event : body["events"]) {
        if (!event.is_object()) continue;
        std::string name = event.value("event name", "");
        if (name.empty()) continue;
        for (const auto& group : event.value("groups", Json::array())) {
            std::string role;
            if (group.is_string()) role = group.get<std::string>();
            else if (group.is_object()) role = group.value("group name", "");
            if (role.empty()) continue;
            if (!seen.emplace(name, role).second) continue;
            stubs.push_back({name, role, seed.culture, seed.time_period, seed.dimension,
                             seed.demographic});
        }
    }
    if (stubs.empty()) raise(Errc::UnparseableResponse, "event sampling: no usable events");
    return stubs;
}

QuerySet build_retrieval_queries(const EventStub& stub, LlmClient& llm) {
    std::string prompt =
        std::string(stub.dimension == Dim::Race ? kQueryTaskRace : kQueryTaskGender) + "\n" +
        std::string(stub.dimension == Dim::Race ? kQueryExampleRace : kQueryExampleGender) +
        "\nEvent: " + stub.event_name + "\nPeriod: " + stub.time_period +
        "\nCulture: " + stub.culture + "\nGroup: " + stub.role +
        "\nList of queries (json format):";

    QuerySet queries = chat_json_retry(
        llm, {{"user", prompt}}, [&](const std::string& response) {
            Json body = parse_outer_json(response, "query generation");
            QuerySet qs;
            qs.dominant_queries = parse_query_list(
                body.contains("dominant queries") ? body["dominant queries"]
                                                  : body.value("dominant_queries", Json()));
            qs.existence_queries = parse_query_list(
                body.contains("existence queries") ? body["existence queries"]
                                                   : body.value("existence_queries", Json()));
            if (qs.dominant_queries.empty() || qs.existence_queries.empty()) {
                raise(Errc::UnparseableResponse, "query generation: lists missing or empty");
            }
            return qs;
        });

    if (queries.dominant_queries.size() > 3) queries.dominant_queries.resize(3);
    if (queries.existence_queries.size() > 3) queries.existence_queries.resize(3);
    for (std::string_view label : Dimension::of(stub.dimension).labels()) {
        queries.existence_queries.push_back("Were there any " + std::string(label) +
                                            " people among the " + stub.role + " in the " +
                                            stub.event_name + "?");
    }
    return queries;
}

EvidenceSet retrieve_evidence(const QuerySet& queries, SearchClient& search) {
    EvidenceSet evidence;
    auto run_query = [&](QueryKind kind, const std::string& query) {
        auto passages = search.search(query);
        if (passages.size() > static_cast<size_t>(kPassagesPerQuery)) {
            passages.resize(kPassagesPerQuery);
        }
        std::vector<DocumentChunk> candidates;
        for (const auto& passage : passages) {
            if (lowercase(passage.url).find("wikipedia") == std::string::npos) continue;
            for (auto& text : chunk_text(passage.text)) {
                candidates.push_back({passage.url, std::move(text), 0});
            }
        }
        evidence.queries.push_back({kind, query, rank_chunks(std::move(candidates), query)});
    };
    for (const auto& q : queries.dominant_queries) run_query(QueryKind::Dominant, q);
    for (const auto& q : queries.existence_queries) run_query(QueryKind::Existence, q);
    if (evidence.empty()) {
        raise(Errc::EmptyEvidence, "no wikipedia-sourced evidence for any query");
    }
    return evidence;
}

FactLabel label_facts(const EventStub& stub, const EvidenceSet& evidence, LlmClient& llm) {
    if (evidence.empty()) raise(Errc::EmptyEvidence, "fact labeling needs evidence");

    std::vector<DocumentChunk> dominant_docs;
    std::vector<DocumentChunk> existence_docs;
    for (const auto& q : evidence.queries) {
        auto& target = q.kind == QueryKind::Dominant ? dominant_docs : existence_docs;
        target.insert(target.end(), q.chunks.begin(), q.chunks.end());
    }
    if (dominant_docs.empty()) dominant_docs = evidence.all_chunks();
    if (existence_docs.empty()) existence_docs = evidence.all_chunks();

    auto ask = [&](const std::vector<DocumentChunk>& docs, const std::string& question) {
        std::string user = std::string(kFactCheckTask) + " " +
                           std::string(stub.dimension == Dim::Race ? kOutputControlRace
                                                                   : kOutputControlGender) +
                           "\nEvent: " + stub.event_name + "\nCulture: " + stub.culture +
                           "\nGroup: " + stub.role + "\nDocuments: " + render_documents(docs) +
                           ".\nQuestion: " + question;
        return chat_json_retry(
            llm,
            {{"system", std::string(kFactCheckSystem)}, {"user", user}},
            [&](const std::string& response) {
                return parse_fact_answers(parse_outer_json(response, "fact check"), stub, docs);
            });
    };

    FactLabel facts;
    facts.dominant = ask(dominant_docs, dominant_question(stub));
    facts.involved = ask(existence_docs, involved_question(stub));

    // Dominant is a subset of involved by definition; patch the involved
    // answer when the model leaves a dominant label out of it.
    for (const auto& fact : facts.dominant) {
        bool present = std::any_of(facts.involved.begin(), facts.involved.end(),
                                   [&](const LabeledFact& f) { return f.label == fact.label; });
        if (!present) facts.involved.push_back(fact);
    }

    if (facts.dominant.empty() && facts.involved.empty()) {
        raise(Errc::AllAnswersNone, "no usable answer for \"" + stub.event_name + "\"");
    }
    return facts;
}

DofairRecord make_record(const EventStub& stub, const FactLabel& facts) {
    DofairRecord record;
    record.event_name = stub.event_name;
    record.role = stub.role;
    record.culture = stub.culture;
    record.time_period = stub.time_period;
    record.dimension = stub.dimension;
    record.dominant = LabelSet(stub.dimension);
    record.involved = LabelSet(stub.dimension);

    std::set<std::pair<std::string, std::string>> seen;
    auto add = [&](const std::vector<LabeledFact>& facts_list, LabelSet& set) {
        for (const auto& fact : facts_list) {
            set.insert(fact.label);
            if (seen.emplace(fact.evidence.doc_id, fact.evidence.quote).second) {
                record.evidence.push_back(fact.evidence);
            }
        }
    };
    add(facts.dominant, record.dominant);
    add(facts.involved, record.involved);
    return record;
}

Benchmark clean_and_resample(std::vector<DofairRecord> records, const CleanPolicy& policy,
                             uint64_t rng_seed, CleanStats* stats) {
    CleanStats local;
    CleanStats& out = stats ? *stats : local;
    std::mt19937_64 rng(rng_seed);

    std::vector<DofairRecord> kept;
    for (auto& record : records) {
        if (record.dominant.empty() || record.involved.empty()) {
            ++out.dropped_empty;
            continue;
        }
        if (record.dimension == Dim::Gender && has_gendered_role_prefix(record.role)) {
            ++out.dropped_gendered_role;
            continue;
        }
        kept.push_back(std::move(record));
    }

    // One record per event, chosen uniformly; groups keep first-seen order.
    std::vector<std::string> event_order;
    std::map<std::string, std::vector<size_t>> by_event;
    for (size_t i = 0; i < kept.size(); ++i) {
        auto [it, fresh] = by_event.try_emplace(kept[i].event_name);
        if (fresh) event_order.push_back(kept[i].event_name);
        it->second.push_back(i);
    }
    std::vector<size_t> surviving;
    for (const auto& event : event_order) {
        const auto& group = by_event[event];
        size_t pick = group.size() == 1
                          ? group[0]
                          : group[std::uniform_int_distribution<size_t>(0, group.size() - 1)(rng)];
        out.dropped_duplicate_event += static_cast<int>(group.size() - 1);
        surviving.push_back(pick);
    }
    std::sort(surviving.begin(), surviving.end());

    // Per-culture quota, cultures visited in seed order with stragglers after.
    std::map<std::string, std::vector<size_t>> by_culture;
    std::vector<std::string> culture_order;
    for (auto culture : kCultures) culture_order.emplace_back(culture);
    for (size_t index : surviving) {
        const auto& culture = kept[index].culture;
        auto [it, fresh] = by_culture.try_emplace(culture);
        if (fresh && std::find(culture_order.begin(), culture_order.end(), culture) ==
                         culture_order.end()) {
            culture_order.push_back(culture);
        }
        it->second.push_back(index);
    }

    Dim dimension = kept.empty() ? Dim::Race : kept.front().dimension;
    int quota = dimension == Dim::Race ? policy.race_quota_per_culture
                                       : policy.gender_quota_per_culture;

    std::vector<size_t> final_indices;
    for (const auto& culture : culture_order) {
        auto it = by_culture.find(culture);
        if (it == by_culture.end()) {
            out.shortfalls.push_back({culture, quota, 0});
            continue;
        }
        auto group = it->second;
        if (static_cast<int>(group.size()) < quota) {
            out.shortfalls.push_back({culture, quota, static_cast<int>(group.size())});
        }
        while (static_cast<int>(group.size()) > quota) {
            // Gender data is rebalanced by trimming male-dominant records
            // first; anything else is trimmed uniformly.
            std::vector<size_t> positions;
            if (dimension == Dim::Gender) {
                LabelSet male_only(Dim::Gender);
                male_only.insert("Male");
                for (size_t p = 0; p < group.size(); ++p) {
                    if (kept[group[p]].dominant == male_only) positions.push_back(p);
                }
            }
            if (positions.empty()) {
                positions.resize(group.size());
                for (size_t p = 0; p < group.size(); ++p) positions[p] = p;
            }
            size_t victim =
                positions[std::uniform_int_distribution<size_t>(0, positions.size() - 1)(rng)];
            group.erase(group.begin() + static_cast<std::ptrdiff_t>(victim));
            ++out.dropped_over_quota;
        }
        final_indices.insert(final_indices.end(), group.begin(), group.end());
    }
    std::sort(final_indices.begin(), final_indices.end());

    Benchmark benchmark;
    benchmark.dimension = dimension;
    benchmark.provenance = "resample-seed-" + std::to_string(rng_seed);
    for (size_t index : final_indices) {
        benchmark.records.push_back(validate_record(kept[index]));
    }
    return benchmark;
}

Benchmark run_construction(const ConstructionConfig& config, LlmClient& llm,
                           SearchClient& search) {
    fs::create_directories(config.out_dir);

    auto seeds = enumerate_seed_combinations(config.dimension);
    if (config.max_seeds > 0 && static_cast<int>(seeds.size()) > config.max_seeds) {
        seeds.resize(static_cast<size_t>(config.max_seeds));
    }

    JsonlWriter skipped(config.out_dir / "skipped.jsonl");

    // Stage 1: event sampling. Seeds that never parse are logged and dropped.
    std::vector<std::vector<EventStub>> per_seed(seeds.size());
    std::mutex skip_mu;
    parallel_for_each(seeds.size(), config.workers, [&](size_t i) {
        try {
            per_seed[i] = chat_json_retry(
                llm, {{"user", render_event_sampling_prompt(seeds[i])}},
                [&](const std::string& response) {
                    return parse_event_response(response, seeds[i]);
                });
        } catch (const Error& e) {
            if (e.code() != Errc::UnparseableResponse) throw;
            std::lock_guard lock(skip_mu);
            skipped.append(Json{{"stage", "events"},
                               {"time_period", seeds[i].time_period},
                               {"culture", seeds[i].culture},
                               {"demographic", seeds[i].demographic},
                               {"reason", e.what()}});
        }
    });

    std::vector<EventStub> stubs;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& batch : per_seed) {
        for (const auto& stub : batch) {
            if (seen.emplace(stub.event_name, stub.role).second) stubs.push_back(stub);
        }
    }
    {
        JsonlWriter writer(config.out_dir / "01_stubs.jsonl");
        for (const auto& stub : stubs) writer.append(stub_to_json(stub));
    }

    // Stages 2-4 run per stub; each stage artifact is written afterwards in
    // stub order so reruns produce identical files.
    std::vector<StubOutcome> outcomes(stubs.size());
    parallel_for_each(stubs.size(), config.workers, [&](size_t i) {
        auto& outcome = outcomes[i];
        try {
            outcome.queries = build_retrieval_queries(stubs[i], llm);
            outcome.evidence = retrieve_evidence(*outcome.queries, search);
            outcome.facts = label_facts(stubs[i], *outcome.evidence, llm);
        } catch (const Error& e) {
            bool skippable = e.code() == Errc::UnparseableResponse ||
                             e.code() == Errc::EmptyEvidence ||
                             e.code() == Errc::AllAnswersNone;
            if (!skippable) throw;
            outcome.skip_stage = !outcome.queries    ? "queries"
                                 : !outcome.evidence ? "evidence"
                                                     : "labels";
            outcome.skip_reason = e.what();
        }
    });

    JsonlWriter query_log(config.out_dir / "02_queries.jsonl");
    JsonlWriter evidence_log(config.out_dir / "03_evidence.jsonl");
    JsonlWriter label_log(config.out_dir / "04_labels.jsonl");
    std::vector<DofairRecord> records;
    for (size_t i = 0; i < stubs.size(); ++i) {
        const auto& outcome = outcomes[i];
        if (!outcome.skip_stage.empty()) {
            skipped.append(Json{{"stage", outcome.skip_stage},
                               {"event", stubs[i].event_name},
                               {"role", stubs[i].role},
                               {"reason", outcome.skip_reason}});
            continue;
        }
        query_log.append(Json{{"event", stubs[i].event_name},
                             {"role", stubs[i].role},
                             {"dominant_queries", outcome.queries->dominant_queries},
                             {"existence_queries", outcome.queries->existence_queries}});
        Json queries_json = Json::array();
        for (const auto& q : outcome.evidence->queries) {
            Json chunks = Json::array();
            for (const auto& c : q.chunks) {
                chunks.push_back({{"url", c.url}, {"text", c.text}, {"rank", c.rank}});
            }
            queries_json.push_back(
                {{"kind", q.kind == QueryKind::Dominant ? "dominant" : "existence"},
                 {"query", q.query},
                 {"chunks", std::move(chunks)}});
        }
        evidence_log.append(Json{{"event", stubs[i].event_name},
                                {"role", stubs[i].role},
                                {"queries", std::move(queries_json)}});
        auto facts_json = [](const std::vector<LabeledFact>& facts) {
            Json out = Json::array();
            for (const auto& f : facts) {
                out.push_back({{"label", f.label},
                               {"doc_id", f.evidence.doc_id},
                               {"quote", f.evidence.quote}});
            }
            return out;
        };
        label_log.append(Json{{"event", stubs[i].event_name},
                             {"role", stubs[i].role},
                             {"dominant", facts_json(outcome.facts->dominant)},
                             {"involved", facts_json(outcome.facts->involved)}});
        records.push_back(make_record(stubs[i], *outcome.facts));
    }

    CleanStats stats;
    Benchmark benchmark = clean_and_resample(std::move(records), config.policy, config.seed,
                                             &stats);
    benchmark.dimension = config.dimension;
    save_benchmark(benchmark, config.out_dir / "05_benchmark.jsonl");
    for (const auto& shortfall : stats.shortfalls) {
        skipped.append(Json{{"stage", "resample"},
                           {"culture", shortfall.culture},
                           {"wanted", shortfall.wanted},
                           {"got", shortfall.got},
                           {"reason", "quota shortfall"}});
    }
    return benchmark;
}

}  // namespace dofair
