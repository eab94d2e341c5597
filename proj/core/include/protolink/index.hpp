#pragma once

#include "protolink/encoding.hpp"
#include "protolink/ontology.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace protolink {

/// Which alias of which entity a prototype row encodes.
struct AliasRow {
    std::string cui;
    std::string alias;
    std::uint32_t alias_index = 0;

    bool operator==(const AliasRow&) const = default;
};

/// Embedding id convention shared with exporters: "<cui>#<alias-index>".
std::string alias_embedding_id(std::string_view cui, std::size_t alias_index);

/// Immutable row-major matrix of unit-norm alias embeddings.
class PrototypeSpace {
public:
    PrototypeSpace(std::size_t dim, std::vector<AliasRow> rows, std::vector<float> data);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const AliasRow& meta(std::size_t i) const { return rows_[i]; }
    const std::vector<AliasRow>& rows() const noexcept { return rows_; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<const float> data() const noexcept { return data_; }

private:
    std::size_t dim_;
    std::vector<AliasRow> rows_;
    std::vector<float> data_;
};

enum class SpaceScope {
    AllAliases,    ///< canonical names and synonyms
    CanonicalOnly, ///< one row per entity
};

/// One row per (active entity, alias), taken from a store with ids
/// "<cui>#<alias-index>". Throws MissingEmbedding or DimensionMismatch.
PrototypeSpace build_space(const OntologySnapshot& snapshot, const EmbeddingStore& store,
                           SpaceScope scope = SpaceScope::AllAliases);
/// Same rows, encoded on the fly.
PrototypeSpace build_space(const OntologySnapshot& snapshot, const TextEncoder& encoder,
                           SpaceScope scope = SpaceScope::AllAliases, unsigned threads = 1);

struct Candidate {
    std::string cui;
    std::string alias;
    double score = 0.0; ///< cosine with the query

    bool operator==(const Candidate&) const = default;
};

/// Total order used everywhere candidates are ranked:
/// score descending, then cui ascending, then alias ascending.
bool ranks_before(const Candidate& a, const Candidate& b) noexcept;

struct CandidateSet {
    std::string query_id;
    std::vector<Candidate> candidates;
};

/// Exact top-k alias rows by cosine. Ties beyond (score, cui, alias) fall
/// back to row order. `threads` partitions rows; the merge is deterministic.
CandidateSet search(const PrototypeSpace& space, const UnitVector& query, std::size_t k, std::string query_id = {},
                    unsigned threads = 1);

/// Searches many queries, parallel across queries.
std::vector<CandidateSet> search_batch(const PrototypeSpace& space, std::span<const UnitVector> queries,
                                       std::size_t k, unsigned threads = 1);

struct EntityScore {
    std::string cui;
    double score = 0.0;

    bool operator==(const EntityScore&) const = default;
};

/// First occurrence of each cui in candidate order, truncated to n entities.
std::vector<EntityScore> dedup_entities(const CandidateSet& cands, std::size_t n);

/// Retrieves alias rows until `n` distinct entities are covered (or the
/// space is exhausted) and returns those entities.
std::vector<EntityScore> search_entities(const PrototypeSpace& space, const UnitVector& query, std::size_t n,
                                         unsigned threads = 1);

/// Space cache: a PROT v1 file plus an alias_meta JSON-lines sidecar.
void save_space(const PrototypeSpace& space, const std::filesystem::path& prot_path,
                const std::filesystem::path& meta_path);
PrototypeSpace load_space(const std::filesystem::path& prot_path, const std::filesystem::path& meta_path);

} // namespace protolink
