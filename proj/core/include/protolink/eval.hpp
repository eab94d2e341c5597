#pragma once

#include "protolink/corpus.hpp"
#include "protolink/encoding.hpp"
#include "protolink/index.hpp"
#include "protolink/ontology.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protolink {

enum class Outcome { Exact = 0, Related = 1, Missed = 2 };

std::string_view to_string(Outcome o) noexcept;

struct MentionRef {
    std::string article_id;
    std::size_t start = 0;
    std::size_t end = 0;

    auto operator<=>(const MentionRef&) const = default;
};

/// Ranked unique entities for one mention plus its gold annotation.
struct RankedResult {
    MentionRef mention;
    std::vector<EntityScore> entities;
    std::string gold_cui;
};

struct MatchOutcome {
    MentionRef mention;
    std::string predicted_cui; ///< empty when nothing was retrieved
    std::string gold_cui;      ///< resolved
    Outcome outcome = Outcome::Missed;
};

/// Fraction of mentions whose resolved gold is among the first n entities.
double recall_at(std::span<const RankedResult> results, std::size_t n, const OntologySnapshot& snapshot);
/// Same, with gold cuis already resolved.
double recall_at(std::span<const RankedResult> results, std::size_t n);

struct Breakdown {
    std::size_t exact = 0;
    std::size_t related = 0;
    std::size_t missed = 0;

    std::size_t total() const noexcept { return exact + related + missed; }
    double exact_fraction() const noexcept;
    double related_fraction() const noexcept;
    double missed_fraction() const noexcept;
};

struct ClassifiedRun {
    std::vector<MatchOutcome> outcomes;
    Breakdown breakdown;
};

/// Exact / Related / Missed of each mention's top-1 entity against its gold.
/// Throws UnknownId for an unresolvable gold.
ClassifiedRun classify_matches(std::span<const RankedResult> results, const OntologySnapshot& snapshot);

/// Rows are FROM (before), columns TO (after), both in Exact, Related,
/// Missed order.
struct TransitionMatrix {
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::array<std::array<double, 3>, 3> row_percent{};
};

/// Throws InvalidArgument unless both runs cover the same mentions.
TransitionMatrix transition_heatmap(std::span<const MatchOutcome> before, std::span<const MatchOutcome> after);

enum class Region { None, A, B };

std::string_view to_string(Region r) noexcept;

struct ArticleSimRecord {
    std::string article_id;
    double s_g = 0.0;
    double s_p = 0.0;
    double diff = 0.0; ///< s_g - s_p
    double r1 = 0.0;   ///< fraction of the article's mentions that are exact
    std::optional<double> r1_reranked;
    Region region = Region::None;
};

/// Replaces Related/Missed mentions with the predicted (A_P) and gold (A_G)
/// canonical names, right to left, and compares each variant with the
/// original article under `doc_encoder`. With `gold_replace_all`, A_G swaps
/// every mention. `outcomes` must include every mention of the article.
/// Throws OverlappingSpans when mentions overlap.
ArticleSimRecord article_similarity(const Article& article, std::span<const MatchOutcome> outcomes,
                                    const OntologySnapshot& snapshot, const TextEncoder& doc_encoder,
                                    bool gold_replace_all = false);

struct RegionSelection {
    std::vector<ArticleSimRecord> records; ///< sorted by diff, then article id
    std::vector<double> smoothed_r1;       ///< parallel to records
    std::vector<double> smoothed_r1_reranked; ///< empty unless every record has one
    double mean = 0.0;
    double stddev = 0.0;
};

/// Region A: diff < mean - sd; region B: diff > mean + sd (population sd).
/// Per-article R@1 is smoothed with a centered moving average clipped at the
/// ends: position i averages [i - window/2, i + (window-1)/2].
RegionSelection select_regions(std::vector<ArticleSimRecord> records, std::size_t window = 200);

/// Centered, end-clipped moving average used by select_regions.
std::vector<double> centered_moving_average(std::span<const double> values, std::size_t window);

struct WordCountBucket {
    std::size_t words = 0;
    std::size_t total = 0;
    std::size_t exact = 0;
    std::size_t related = 0;
    double exact_rate = 0.0;
    double related_rate = 0.0;
};

/// Groups outcomes by the word count of their mention surface (parallel
/// spans) and drops buckets with fewer than `min_count` mentions.
std::vector<WordCountBucket> wordcount_buckets(std::span<const MatchOutcome> outcomes,
                                               std::span<const std::string> surfaces, std::size_t min_count = 100);

} // namespace protolink
