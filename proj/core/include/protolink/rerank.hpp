#pragma once

#include "protolink/config.hpp"
#include "protolink/encoding.hpp"
#include "protolink/index.hpp"
#include "protolink/ontology.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protolink {

/// Coefficients of the parametric score
///   adjusted = a * score + b * mean(scores of the entity's aliases) + c * n
/// where n counts the entity's aliases among the retrieved candidates.
struct RerankParams {
    double a = 1.0; ///< cosine similarity weight
    double b = 0.0; ///< representative (mean) alias score weight
    double c = 0.0; ///< candidate entity frequency weight

    /// Throws InvalidArgument if any coefficient is negative or all are zero.
    void validate() const;
    bool operator==(const RerankParams&) const = default;
};

struct RerankedCandidate {
    std::string cui;
    std::string alias;
    double score = 0.0;    ///< original cosine
    double adjusted = 0.0; ///< reranking score

    bool operator==(const RerankedCandidate&) const = default;
};

/// Candidates ordered by (adjusted desc, cui asc, alias asc).
struct RerankedSet {
    std::string query_id;
    std::vector<RerankedCandidate> candidates;

    /// View with `score` replaced by the adjusted score, in reranked order.
    CandidateSet as_candidate_set() const;
};

RerankedSet parametric_rerank(const CandidateSet& cands, const RerankParams& params);

/// adjusted = score + max over (mention type, candidate type) pairs of the
/// cosine between their encoded names.
RerankedSet type_rerank(const CandidateSet& cands, std::span<const std::string> mention_types,
                        const OntologySnapshot& snapshot, const TextEncoder& encoder);

/// adjusted = score + cosine(encoded mention group, encoded candidate group).
RerankedSet group_rerank(const CandidateSet& cands, std::string_view mention_group, const OntologySnapshot& snapshot,
                         const TextEncoder& encoder);

std::vector<EntityScore> dedup_entities(const RerankedSet& reranked, std::size_t n);

struct ParamGrid {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;

    /// a in {1,2,5,10,20,50}, b in {0,.02,.05,.1,.2,.5}, c in {0,.01,.05,.1,.5}.
    static ParamGrid defaults();
    /// Reads `grid.a`, `grid.b`, `grid.c`; missing keys take the defaults.
    static ParamGrid from_config(const Config& config);

    /// Valid points in lexicographic (a, b, c) order, duplicates removed.
    std::vector<RerankParams> points() const;
};

/// One development mention: its alias-level candidates and resolved gold cui.
struct DevExample {
    CandidateSet candidates;
    std::string gold_cui;
};

/// Mentions whose top entity after parametric reranking is the gold.
std::size_t parametric_hits(std::span<const DevExample> dev, const RerankParams& params);

struct GridSearchResult {
    RerankParams params;
    double r_at_1 = 0.0;
    std::size_t hits = 0;
    std::size_t points_evaluated = 0;
};

/// Exhaustive R@1 maximization; ties go to the lexicographically smallest
/// (a, b, c). Points are evaluated concurrently, reduced deterministically.
GridSearchResult grid_search(std::span<const DevExample> dev, const ParamGrid& grid, unsigned threads = 1);

/// R@1 with the full parameters and with b or c removed.
struct AblationResult {
    double baseline = 0.0; ///< no reranking
    double full = 0.0;
    double without_b = 0.0;
    double without_c = 0.0;
};

AblationResult ablate(std::span<const DevExample> dev, const RerankParams& params);

} // namespace protolink
