#include "protolink/eval.hpp"

#include "protolink/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace protolink {

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
    case Outcome::Exact: return "exact";
    case Outcome::Related: return "related";
    case Outcome::Missed: return "missed";
    }
    return "missed";
}

std::string_view to_string(Region r) noexcept {
    switch (r) {
    case Region::None: return "";
    case Region::A: return "A";
    case Region::B: return "B";
    }
    return "";
}

namespace {

double recall_impl(std::span<const RankedResult> results, std::size_t n, const OntologySnapshot* snapshot) {
    if (results.empty()) throw Error(ErrorCode::EmptyInput, "recall over no results");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "recall cut-off must be at least 1");
    std::size_t hits = 0;
    for (const auto& r : results) {
        const std::string gold = snapshot ? snapshot->resolve(r.gold_cui) : r.gold_cui;
        const std::size_t limit = std::min(n, r.entities.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (r.entities[i].cui == gold) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

double fraction(std::size_t part, std::size_t total) noexcept {
    return total == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(total);
}

} // namespace

double recall_at(std::span<const RankedResult> results, std::size_t n, const OntologySnapshot& snapshot) {
    return recall_impl(results, n, &snapshot);
}

double recall_at(std::span<const RankedResult> results, std::size_t n) { return recall_impl(results, n, nullptr); }

double Breakdown::exact_fraction() const noexcept { return fraction(exact, total()); }
double Breakdown::related_fraction() const noexcept { return fraction(related, total()); }
double Breakdown::missed_fraction() const noexcept { return fraction(missed, total()); }

ClassifiedRun classify_matches(std::span<const RankedResult> results, const OntologySnapshot& snapshot) {
    ClassifiedRun run;
    run.outcomes.reserve(results.size());
    for (const auto& r : results) {
        MatchOutcome m;
        m.mention = r.mention;
        m.gold_cui = snapshot.resolve(r.gold_cui);
        if (!r.entities.empty()) m.predicted_cui = r.entities.front().cui;
        if (!m.predicted_cui.empty()) {
            const std::string pred = snapshot.resolve(m.predicted_cui);
            if (pred == m.gold_cui) {
                m.outcome = Outcome::Exact;
            } else if (snapshot.relations().contains(pred, m.gold_cui)) {
                m.outcome = Outcome::Related;
            }
        }
        switch (m.outcome) {
        case Outcome::Exact: ++run.breakdown.exact; break;
        case Outcome::Related: ++run.breakdown.related; break;
        case Outcome::Missed: ++run.breakdown.missed; break;
        }
        run.outcomes.push_back(std::move(m));
    }
    return run;
}

TransitionMatrix transition_heatmap(std::span<const MatchOutcome> before, std::span<const MatchOutcome> after) {
    std::map<MentionRef, Outcome> from;
    for (const auto& m : before) {
        if (!from.emplace(m.mention, m.outcome).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate mention in the 'before' run");
        }
    }
    if (after.size() != from.size()) {
        throw Error(ErrorCode::InvalidArgument, "before and after runs cover different mentions");
    }
    TransitionMatrix t;
    std::map<MentionRef, bool> seen;
    for (const auto& m : after) {
        auto it = from.find(m.mention);
        if (it == from.end() || !seen.emplace(m.mention, true).second) {
            throw Error(ErrorCode::InvalidArgument, "before and after runs cover different mentions");
        }
        ++t.counts[static_cast<std::size_t>(it->second)][static_cast<std::size_t>(m.outcome)];
    }
    for (std::size_t r = 0; r < 3; ++r) {
        std::size_t row_total = 0;
        for (std::size_t c = 0; c < 3; ++c) row_total += t.counts[r][c];
        for (std::size_t c = 0; c < 3; ++c) {
            t.row_percent[r][c] =
                row_total == 0 ? 0.0 : 100.0 * static_cast<double>(t.counts[r][c]) / static_cast<double>(row_total);
        }
    }
    return t;
}

ArticleSimRecord article_similarity(const Article& article, std::span<const MatchOutcome> outcomes,
                                    const OntologySnapshot& snapshot, const TextEncoder& doc_encoder,
                                    bool gold_replace_all) {
    std::map<std::pair<std::size_t, std::size_t>, const MatchOutcome*> by_span;
    for (const auto& o : outcomes) {
        if (o.mention.article_id == article.id) by_span[{o.mention.start, o.mention.end}] = &o;
    }

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& m : article.mentions) spans.emplace_back(m.start, m.end);
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].first < spans[i - 1].second) {
            throw Error(ErrorCode::OverlappingSpans, "article " + article.id + ": overlapping mention spans at " +
                                                         std::to_string(spans[i].first));
        }
    }

    struct Replacement {
        std::size_t start;
        std::size_t end;
        std::string predicted;
        std::string gold;
        bool predicted_applies;
    };
    std::vector<Replacement> reps;
    std::size_t exact = 0;
    for (const auto& m : article.mentions) {
        auto it = by_span.find({m.start, m.end});
        if (it == by_span.end()) {
            throw Error(ErrorCode::InvalidArgument, "article " + article.id + ": no outcome for mention at " +
                                                        std::to_string(m.start));
        }
        const MatchOutcome& o = *it->second;
        if (o.outcome == Outcome::Exact) ++exact;
        const bool swap = o.outcome != Outcome::Exact;
        if (!swap && !gold_replace_all) continue;
        std::string predicted = o.predicted_cui.empty() ? m.text : snapshot.active_entity(o.predicted_cui).canonical_name;
        reps.push_back({m.start, m.end, std::move(predicted), snapshot.active_entity(o.gold_cui).canonical_name, swap});
    }

    std::sort(reps.begin(), reps.end(), [](const Replacement& a, const Replacement& b) { return a.start < b.start; });

    const std::string original = article.text();
    std::string with_pred = original;
    std::string with_gold = original;
    for (auto it = reps.rbegin(); it != reps.rend(); ++it) {
        if (it->predicted_applies) with_pred.replace(it->start, it->end - it->start, it->predicted);
        with_gold.replace(it->start, it->end - it->start, it->gold);
    }

    const UnitVector a = doc_encoder.encode(original);
    ArticleSimRecord rec;
    rec.article_id = article.id;
    rec.s_p = cosine(a, doc_encoder.encode(with_pred));
    rec.s_g = cosine(a, doc_encoder.encode(with_gold));
    rec.diff = rec.s_g - rec.s_p;
    rec.r1 = fraction(exact, article.mentions.size());
    return rec;
}

std::vector<double> centered_moving_average(std::span<const double> values, std::size_t window) {
    if (window == 0) throw Error(ErrorCode::InvalidArgument, "moving-average window must be positive");
    const std::size_t n = values.size();
    const std::size_t back = window / 2;
    const std::size_t ahead = (window - 1) / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= back ? i - back : 0;
        const std::size_t hi = std::min(n - 1, i + ahead);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

RegionSelection select_regions(std::vector<ArticleSimRecord> records, std::size_t window) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "region selection needs at least one record");
    RegionSelection sel;
    const double n = static_cast<double>(records.size());
    double sum = 0.0;
    for (const auto& r : records) sum += r.diff;
    sel.mean = sum / n;
    double sq = 0.0;
    for (const auto& r : records) sq += (r.diff - sel.mean) * (r.diff - sel.mean);
    sel.stddev = std::sqrt(sq / n);

    const auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                              [](const auto& x, const auto& y) { return x.diff < y.diff; });
    const bool constant = lo->diff == hi->diff;
    for (auto& r : records) {
        r.region = Region::None;
        if (constant) continue;
        if (r.diff < sel.mean - sel.stddev) r.region = Region::A;
        else if (r.diff > sel.mean + sel.stddev) r.region = Region::B;
    }

    std::sort(records.begin(), records.end(), [](const ArticleSimRecord& x, const ArticleSimRecord& y) {
        if (x.diff != y.diff) return x.diff < y.diff;
        return x.article_id < y.article_id;
    });
    std::vector<double> r1;
    std::vector<double> r1_reranked;
    bool all_reranked = true;
    for (const auto& r : records) {
        r1.push_back(r.r1);
        if (r.r1_reranked) r1_reranked.push_back(*r.r1_reranked);
        else all_reranked = false;
    }
    sel.smoothed_r1 = centered_moving_average(r1, window);
    if (all_reranked) sel.smoothed_r1_reranked = centered_moving_average(r1_reranked, window);
    sel.records = std::move(records);
    return sel;
}

std::vector<WordCountBucket> wordcount_buckets(std::span<const MatchOutcome> outcomes,
                                               std::span<const std::string> surfaces, std::size_t min_count) {
    if (outcomes.size() != surfaces.size()) {
        throw Error(ErrorCode::InvalidArgument, "outcomes and surfaces must be parallel");
    }
    std::map<std::size_t, WordCountBucket> buckets;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const std::size_t words = word_count(surfaces[i]);
        auto& b = buckets[words];
        b.words = words;
        ++b.total;
        if (outcomes[i].outcome == Outcome::Exact) ++b.exact;
        if (outcomes[i].outcome == Outcome::Related) ++b.related;
    }
    std::vector<WordCountBucket> out;
    for (auto& [_, b] : buckets) {
        if (b.total < min_count) continue;
        b.exact_rate = fraction(b.exact, b.total);
        b.related_rate = fraction(b.related, b.total);
        out.push_back(b);
    }
    return out;
}

} // namespace protolink
