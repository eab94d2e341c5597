#include "protolink/rerank.hpp"

#include "protolink/error.hpp"
#include "protolink/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace protolink {

void RerankParams::validate() const {
    for (double v : {a, b, c}) {
        if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "rerank coefficients must be >= 0");
    }
    if (a == 0.0 && b == 0.0 && c == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "rerank coefficients must not all be zero");
    }
}

namespace {

bool reranked_before(const RerankedCandidate& x, const RerankedCandidate& y) noexcept {
    if (x.adjusted != y.adjusted) return x.adjusted > y.adjusted;
    if (x.cui != y.cui) return x.cui < y.cui;
    return x.alias < y.alias;
}

void require_candidates(const CandidateSet& cands) {
    if (cands.candidates.empty()) throw Error(ErrorCode::EmptyInput, "cannot rerank an empty candidate set");
}

template <typename ScoreFn>
RerankedSet rerank_with(const CandidateSet& cands, ScoreFn&& adjusted) {
    RerankedSet out;
    out.query_id = cands.query_id;
    out.candidates.reserve(cands.candidates.size());
    for (const auto& c : cands.candidates) out.candidates.push_back({c.cui, c.alias, c.score, adjusted(c)});
    std::stable_sort(out.candidates.begin(), out.candidates.end(), reranked_before);
    return out;
}

} // namespace

CandidateSet RerankedSet::as_candidate_set() const {
    CandidateSet out;
    out.query_id = query_id;
    out.candidates.reserve(candidates.size());
    for (const auto& c : candidates) out.candidates.push_back({c.cui, c.alias, c.adjusted});
    return out;
}

RerankedSet parametric_rerank(const CandidateSet& cands, const RerankParams& params) {
    require_candidates(cands);
    params.validate();

    struct Tally {
        double sum = 0.0;
        std::size_t n = 0;
    };
    std::unordered_map<std::string_view, Tally> per_entity;
    for (const auto& c : cands.candidates) {
        auto& t = per_entity[c.cui];
        t.sum += c.score;
        ++t.n;
    }
    return rerank_with(cands, [&](const Candidate& c) {
        const auto& t = per_entity.at(c.cui);
        const double n = static_cast<double>(t.n);
        return params.a * c.score + params.b * (t.sum / n) + params.c * n;
    });
}

RerankedSet type_rerank(const CandidateSet& cands, std::span<const std::string> mention_types,
                        const OntologySnapshot& snapshot, const TextEncoder& encoder) {
    require_candidates(cands);
    if (mention_types.empty()) throw Error(ErrorCode::InvalidArgument, "mention has no semantic types");

    std::map<std::string, UnitVector, std::less<>> encoded;
    auto encode = [&](const std::string& name) -> const UnitVector& {
        auto it = encoded.find(name);
        if (it == encoded.end()) it = encoded.emplace(name, encoder.encode(name)).first;
        return it->second;
    };

    std::unordered_map<std::string_view, double> type_score;
    for (const auto& c : cands.candidates) {
        if (type_score.contains(c.cui)) continue;
        const Entity& e = snapshot.active_entity(c.cui);
        if (e.type_names.empty()) throw Error(ErrorCode::InconsistentSnapshot, "entity " + e.cui + " has no types");
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& mt : mention_types) {
            for (const auto& ct : e.type_names) best = std::max(best, cosine(encode(mt), encode(ct)));
        }
        type_score.emplace(c.cui, best);
    }
    return rerank_with(cands, [&](const Candidate& c) { return c.score + type_score.at(c.cui); });
}

RerankedSet group_rerank(const CandidateSet& cands, std::string_view mention_group, const OntologySnapshot& snapshot,
                         const TextEncoder& encoder) {
    require_candidates(cands);
    if (mention_group.empty()) throw Error(ErrorCode::InvalidArgument, "mention has no semantic group");

    const UnitVector mention = encoder.encode(mention_group);
    std::map<std::string, double, std::less<>> by_group;
    std::unordered_map<std::string_view, double> group_score;
    for (const auto& c : cands.candidates) {
        if (group_score.contains(c.cui)) continue;
        const Entity& e = snapshot.active_entity(c.cui);
        if (e.group_name.empty()) throw Error(ErrorCode::InconsistentSnapshot, "entity " + e.cui + " has no group");
        auto it = by_group.find(e.group_name);
        if (it == by_group.end()) it = by_group.emplace(e.group_name, cosine(mention, encoder.encode(e.group_name))).first;
        group_score.emplace(c.cui, it->second);
    }
    return rerank_with(cands, [&](const Candidate& c) { return c.score + group_score.at(c.cui); });
}

std::vector<EntityScore> dedup_entities(const RerankedSet& reranked, std::size_t n) {
    return dedup_entities(reranked.as_candidate_set(), n);
}

ParamGrid ParamGrid::defaults() {
    return {{1, 2, 5, 10, 20, 50}, {0, 0.02, 0.05, 0.1, 0.2, 0.5}, {0, 0.01, 0.05, 0.1, 0.5}};
}

ParamGrid ParamGrid::from_config(const Config& config) {
    ParamGrid g = defaults();
    if (config.has("grid.a")) g.a = config.get_doubles("grid.a");
    if (config.has("grid.b")) g.b = config.get_doubles("grid.b");
    if (config.has("grid.c")) g.c = config.get_doubles("grid.c");
    return g;
}

std::vector<RerankParams> ParamGrid::points() const {
    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto as = sorted(a), bs = sorted(b), cs = sorted(c);
    std::vector<RerankParams> out;
    for (double x : as) {
        for (double y : bs) {
            for (double z : cs) {
                RerankParams p{x, y, z};
                try {
                    p.validate();
                } catch (const Error&) {
                    continue;
                }
                out.push_back(p);
            }
        }
    }
    return out;
}

std::size_t parametric_hits(std::span<const DevExample> dev, const RerankParams& params) {
    std::size_t hits = 0;
    for (const auto& ex : dev) {
        if (ex.candidates.candidates.empty()) continue;
        auto top = dedup_entities(parametric_rerank(ex.candidates, params), 1);
        if (!top.empty() && top.front().cui == ex.gold_cui) ++hits;
    }
    return hits;
}

GridSearchResult grid_search(std::span<const DevExample> dev, const ParamGrid& grid, unsigned threads) {
    if (dev.empty()) throw Error(ErrorCode::EmptyInput, "grid search needs a non-empty development set");
    if (grid.a.empty() || grid.b.empty() || grid.c.empty()) {
        throw Error(ErrorCode::EmptyInput, "grid search needs non-empty a, b and c lists");
    }
    const auto points = grid.points();
    if (points.empty()) throw Error(ErrorCode::EmptyInput, "grid has no valid points");

    std::vector<std::size_t> hits(points.size());
    parallel_chunks(points.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) hits[i] = parametric_hits(dev, points[i]);
    });

    // Points are in lexicographic order, so the first maximum wins ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (hits[i] > hits[best]) best = i;
    }
    return {points[best], static_cast<double>(hits[best]) / static_cast<double>(dev.size()), hits[best],
            points.size()};
}

AblationResult ablate(std::span<const DevExample> dev, const RerankParams& params) {
    if (dev.empty()) throw Error(ErrorCode::EmptyInput, "ablation needs a non-empty development set");
    const double total = static_cast<double>(dev.size());
    auto r1 = [&](const RerankParams& p) {
        try {
            p.validate();
        } catch (const Error&) {
            return 0.0;
        }
        return static_cast<double>(parametric_hits(dev, p)) / total;
    };
    AblationResult out;
    out.baseline = r1({1.0, 0.0, 0.0});
    out.full = r1(params);
    out.without_b = r1({params.a, 0.0, params.c});
    out.without_c = r1({params.a, params.b, 0.0});
    return out;
}

} // namespace protolink
