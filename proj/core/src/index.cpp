#include "protolink/index.hpp"

#include "jsonl.hpp"
#include "protolink/error.hpp"
#include "protolink/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace protolink {

std::string alias_embedding_id(std::string_view cui, std::size_t alias_index) {
    return std::string(cui) + "#" + std::to_string(alias_index);
}

PrototypeSpace::PrototypeSpace(std::size_t dim, std::vector<AliasRow> rows, std::vector<float> data)
    : dim_(dim), rows_(std::move(rows)), data_(std::move(data)) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "prototype space dim must be positive");
    if (data_.size() != rows_.size() * dim_) {
        throw Error(ErrorCode::DimensionMismatch, "prototype data does not match rows x dim");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double n = l2_norm(row(i));
        if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
            throw Error(ErrorCode::InvalidArgument, "prototype row " + std::to_string(i) + " (" + rows_[i].cui +
                                                        ") is not unit norm");
        }
    }
}

namespace {

struct Slot {
    std::size_t entity;
    std::size_t alias_index;
};

std::vector<Slot> collect_slots(const OntologySnapshot& snapshot, SpaceScope scope) {
    std::vector<Slot> slots;
    const auto& active = snapshot.active_entities();
    for (std::size_t e = 0; e < active.size(); ++e) {
        const std::size_t n = scope == SpaceScope::CanonicalOnly ? 1 : active[e]->aliases.size();
        for (std::size_t a = 0; a < n; ++a) slots.push_back({e, a});
    }
    return slots;
}

AliasRow make_row(const Entity& e, std::size_t alias_index) {
    return {e.cui, e.aliases[alias_index], static_cast<std::uint32_t>(alias_index)};
}

} // namespace

PrototypeSpace build_space(const OntologySnapshot& snapshot, const EmbeddingStore& store, SpaceScope scope) {
    const auto slots = collect_slots(snapshot, scope);
    const auto& active = snapshot.active_entities();
    const std::size_t dim = store.dim();
    std::vector<AliasRow> rows;
    std::vector<float> data;
    rows.reserve(slots.size());
    data.reserve(slots.size() * dim);
    for (const auto& s : slots) {
        const Entity& e = *active[s.entity];
        const auto id = alias_embedding_id(e.cui, s.alias_index);
        auto idx = store.index_of(id);
        if (!idx) throw Error(ErrorCode::MissingEmbedding, "no embedding for alias id " + id);
        auto v = store.vector(*idx);
        rows.push_back(make_row(e, s.alias_index));
        data.insert(data.end(), v.begin(), v.end());
    }
    return PrototypeSpace(dim, std::move(rows), std::move(data));
}

PrototypeSpace build_space(const OntologySnapshot& snapshot, const TextEncoder& encoder, SpaceScope scope,
                           unsigned threads) {
    const auto slots = collect_slots(snapshot, scope);
    const auto& active = snapshot.active_entities();
    const std::size_t dim = encoder.dim();
    std::vector<AliasRow> rows;
    rows.reserve(slots.size());
    for (const auto& s : slots) rows.push_back(make_row(*active[s.entity], s.alias_index));

    std::vector<float> data(slots.size() * dim);
    parallel_chunks(slots.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const UnitVector v = encoder.encode(rows[i].alias);
            if (v.dim() != dim) {
                throw Error(ErrorCode::DimensionMismatch, "encoder returned dim " + std::to_string(v.dim()));
            }
            std::copy(v.values().begin(), v.values().end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
        }
    });
    return PrototypeSpace(dim, std::move(rows), std::move(data));
}

bool ranks_before(const Candidate& a, const Candidate& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    if (a.cui != b.cui) return a.cui < b.cui;
    return a.alias < b.alias;
}

namespace {

struct Hit {
    double score;
    std::size_t row;
};

class HitOrder {
public:
    explicit HitOrder(const PrototypeSpace& space) : space_(space) {}

    bool operator()(const Hit& a, const Hit& b) const noexcept {
        if (a.score != b.score) return a.score > b.score;
        const auto& ma = space_.meta(a.row);
        const auto& mb = space_.meta(b.row);
        if (ma.cui != mb.cui) return ma.cui < mb.cui;
        if (ma.alias != mb.alias) return ma.alias < mb.alias;
        return a.row < b.row;
    }

private:
    const PrototypeSpace& space_;
};

// Bounded selection; the heap front is the worst hit kept so far.
void top_k_range(const PrototypeSpace& space, std::span<const float> query, std::size_t k, std::size_t begin,
                 std::size_t end, std::vector<Hit>& heap) {
    const HitOrder better(space);
    heap.clear();
    heap.reserve(std::min(k, end - begin));
    for (std::size_t r = begin; r < end; ++r) {
        const Hit h{dot(query, space.row(r)), r};
        if (heap.size() < k) {
            heap.push_back(h);
            std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(h, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), better);
            heap.back() = h;
            std::push_heap(heap.begin(), heap.end(), better);
        }
    }
}

void check_query(const PrototypeSpace& space, const UnitVector& query, std::size_t k) {
    if (space.empty()) throw Error(ErrorCode::EmptyInput, "search on an empty prototype space");
    if (query.dim() != space.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "query dim " + std::to_string(query.dim()) + " != space dim " +
                                                      std::to_string(space.dim()));
    }
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
}

CandidateSet to_candidates(const PrototypeSpace& space, std::vector<Hit> hits, std::size_t k, std::string query_id) {
    const HitOrder better(space);
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
    CandidateSet out;
    out.query_id = std::move(query_id);
    out.candidates.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const auto& m = space.meta(hits[i].row);
        out.candidates.push_back({m.cui, m.alias, hits[i].score});
    }
    return out;
}

} // namespace

CandidateSet search(const PrototypeSpace& space, const UnitVector& query, std::size_t k, std::string query_id,
                    unsigned threads) {
    check_query(space, query, k);
    const std::size_t chunks = chunk_count(space.size(), threads);
    std::vector<std::vector<Hit>> partial(chunks);
    parallel_chunks(space.size(), threads, [&](std::size_t w, std::size_t begin, std::size_t end) {
        top_k_range(space, query.values(), k, begin, end, partial[w]);
    });
    std::vector<Hit> merged;
    for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
    return to_candidates(space, std::move(merged), k, std::move(query_id));
}

std::vector<CandidateSet> search_batch(const PrototypeSpace& space, std::span<const UnitVector> queries,
                                       std::size_t k, unsigned threads) {
    for (const auto& q : queries) check_query(space, q, k);
    std::vector<CandidateSet> out(queries.size());
    parallel_chunks(queries.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<Hit> heap;
        for (std::size_t i = begin; i < end; ++i) {
            top_k_range(space, queries[i].values(), k, 0, space.size(), heap);
            out[i] = to_candidates(space, heap, k, std::to_string(i));
        }
    });
    return out;
}

std::vector<EntityScore> dedup_entities(const CandidateSet& cands, std::size_t n) {
    std::vector<EntityScore> out;
    std::unordered_set<std::string_view> seen;
    for (const auto& c : cands.candidates) {
        if (out.size() >= n) break;
        if (seen.insert(c.cui).second) out.push_back({c.cui, c.score});
    }
    return out;
}

std::vector<EntityScore> search_entities(const PrototypeSpace& space, const UnitVector& query, std::size_t n,
                                         unsigned threads) {
    std::size_t k = std::max<std::size_t>(n, 1);
    for (;;) {
        auto cands = search(space, query, k, {}, threads);
        auto entities = dedup_entities(cands, n);
        if (entities.size() >= n || k >= space.size()) return entities;
        k = std::min(space.size(), k * 2);
    }
}

void save_space(const PrototypeSpace& space, const std::filesystem::path& prot_path,
                const std::filesystem::path& meta_path) {
    std::vector<std::string> ids;
    ids.reserve(space.size());
    for (const auto& m : space.rows()) ids.push_back(alias_embedding_id(m.cui, m.alias_index));
    write_embeddings_raw(prot_path, space.dim(), ids, space.data());

    std::ofstream out(meta_path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + meta_path.string());
    for (const auto& m : space.rows()) {
        nlohmann::json j;
        j["cui"] = m.cui;
        j["alias"] = m.alias;
        j["alias_index"] = m.alias_index;
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed: " + meta_path.string());
}

PrototypeSpace load_space(const std::filesystem::path& prot_path, const std::filesystem::path& meta_path) {
    const EmbeddingStore store = load_embeddings(prot_path);
    std::vector<AliasRow> rows;
    detail::for_each_json_line(meta_path, [&](const nlohmann::json& j, std::size_t) {
        rows.push_back({j.at("cui").get<std::string>(), j.at("alias").get<std::string>(),
                        j.at("alias_index").get<std::uint32_t>()});
    });
    if (rows.size() != store.size()) {
        throw Error(ErrorCode::MalformedRecord, "space cache: " + std::to_string(rows.size()) + " meta rows vs " +
                                                    std::to_string(store.size()) + " vectors");
    }
    std::vector<float> data;
    data.reserve(store.size() * store.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (store.id(i) != alias_embedding_id(rows[i].cui, rows[i].alias_index)) {
            throw Error(ErrorCode::MalformedRecord, "space cache: row " + std::to_string(i) + " id " + store.id(i) +
                                                        " does not match its metadata");
        }
        auto v = store.vector(i);
        data.insert(data.end(), v.begin(), v.end());
    }
    return PrototypeSpace(store.dim(), std::move(rows), std::move(data));
}

} // namespace protolink
