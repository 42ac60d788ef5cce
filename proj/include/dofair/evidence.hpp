#pragma once

#include <string>
#include <vector>

namespace dofair {

/// One scored slice of a retrieved document. `rank` is the chunk's position
/// among the kept chunks for its query, starting at 0.
struct DocumentChunk {
    std::string url;
    std::string text;
    int rank = 0;

    bool operator==(const DocumentChunk&) const = default;
};

enum class QueryKind { Dominant, Existence };

struct QueryEvidence {
    QueryKind kind = QueryKind::Dominant;
    std::string query;
    std::vector<DocumentChunk> chunks;  // at most 5, best first
};

/// Evidence gathered for one record stub, grouped per query.
struct EvidenceSet {
    std::vector<QueryEvidence> queries;

    bool empty() const {
        for (const auto& q : queries)
            if (!q.chunks.empty()) return false;
        return true;
    }

    /// Flattened view in query order, chunk order preserved.
    std::vector<DocumentChunk> all_chunks() const {
        std::vector<DocumentChunk> out;
        for (const auto& q : queries) out.insert(out.end(), q.chunks.begin(), q.chunks.end());
        return out;
    }
};

}  // namespace dofair
