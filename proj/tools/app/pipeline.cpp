#include "pipeline.hpp"

#include "format.hpp"
#include "log.hpp"
#include "plots.hpp"

#include <protolink/context.hpp>
#include <protolink/corpus.hpp>
#include <protolink/encoding.hpp>
#include <protolink/error.hpp>
#include <protolink/eval.hpp>
#include <protolink/index.hpp>
#include <protolink/ontology.hpp>
#include <protolink/parallel.hpp>
#include <protolink/rerank.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace protolink::app {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 initialization failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
    return out;
}

OntologySnapshot load_snapshot(const RunConfig& rc) {
    auto snap = rc.relations ? load_ontology(rc.ontology, *rc.relations) : load_ontology(rc.ontology);
    const auto& s = snap.summary();
    log_line("ontology: " + std::to_string(s.total) + " records, " + std::to_string(s.active) + " active, " +
             std::to_string(snap.merge_map().size()) + " merged, " + std::to_string(s.excluded()) + " excluded, " +
             std::to_string(snap.relations().size()) + " relation pairs");
    return snap;
}

fs::path cache_prot(const fs::path& dir) { return dir / "space.prot"; }
fs::path cache_meta(const fs::path& dir) { return dir / "alias_meta.jsonl"; }

/// Everything the link/evaluate commands share.
class Workspace {
public:
    explicit Workspace(const RunConfig& rc) : rc_(rc), snapshot_(load_snapshot(rc)) {
        if (rc.encoder == EncoderKind::Store) {
            alias_store_ = std::make_shared<EmbeddingStore>(load_embeddings(*rc.embeddings));
            for (const auto& w : alias_store_->warnings()) log_line("warning: " + w);
            auto text_store = std::make_shared<const EmbeddingStore>(load_embeddings(*rc.text_embeddings));
            base_encoder_ = std::make_unique<LookupEncoder>(std::move(text_store));
        } else {
            base_encoder_ = std::make_unique<ReferenceEncoder>(rc.dim);
        }
        encoder_ = std::make_unique<CachingEncoder>(*base_encoder_);
    }

    const RunConfig& config() const noexcept { return rc_; }
    const OntologySnapshot& snapshot() const noexcept { return snapshot_; }
    const TextEncoder& encoder() const noexcept { return *encoder_; }

    const PrototypeSpace& space() {
        if (!space_) space_.emplace(make_space(SpaceScope::AllAliases));
        return *space_;
    }
    const PrototypeSpace& canonical_space() {
        if (!canonical_space_) canonical_space_.emplace(make_space(SpaceScope::CanonicalOnly));
        return *canonical_space_;
    }

private:
    PrototypeSpace make_space(SpaceScope scope) const {
        if (scope == SpaceScope::AllAliases && rc_.space_cache && fs::exists(cache_prot(*rc_.space_cache))) {
            log_line("loading prototype space cache from " + rc_.space_cache->string());
            return load_space(cache_prot(*rc_.space_cache), cache_meta(*rc_.space_cache));
        }
        auto space = alias_store_ ? build_space(snapshot_, *alias_store_, scope)
                                  : build_space(snapshot_, *encoder_, scope, rc_.threads);
        log_line(std::string(scope == SpaceScope::AllAliases ? "prototype" : "canonical-name") +
                 " space: " + std::to_string(space.size()) + " rows, dim " + std::to_string(space.dim()));
        return space;
    }

    const RunConfig& rc_;
    OntologySnapshot snapshot_;
    std::shared_ptr<EmbeddingStore> alias_store_;
    std::unique_ptr<TextEncoder> base_encoder_;
    std::unique_ptr<CachingEncoder> encoder_;
    std::optional<PrototypeSpace> space_;
    std::optional<PrototypeSpace> canonical_space_;
};

struct MentionQuery {
    std::size_t article = 0;
    std::size_t mention = 0;
    MentionRef ref;
    std::string surface;
    std::string query_text;
    UnitVector vector;
    std::string gold; ///< resolved
};

std::string query_id(const MentionRef& ref) {
    return ref.article_id + ":" + std::to_string(ref.start) + "-" + std::to_string(ref.end);
}

std::vector<Article> load_articles(const RunConfig& rc) {
    if (!rc.corpus) throw Error(ErrorCode::Config, "missing required key 'paths.corpus'");
    auto articles = load_corpus(*rc.corpus);
    std::size_t mentions = 0;
    for (const auto& a : articles) mentions += a.mentions.size();
    log_line("corpus: " + std::to_string(articles.size()) + " articles, " + std::to_string(mentions) + " mentions");
    return articles;
}

std::vector<MentionQuery> build_queries(Workspace& ws, const std::vector<Article>& articles) {
    const RunConfig& rc = ws.config();
    AbbreviationMap abbreviations;
    if (rc.abbreviations) abbreviations = load_abbreviations(*rc.abbreviations);
    StopwordSet stopwords = rc.stopwords ? load_stopwords(*rc.stopwords) : default_stopwords();

    std::unique_ptr<TokenSource> tokens;
    const bool needs_tokens = rc.context == ContextMode::Attention || rc.context == ContextMode::Implicit;
    if (needs_tokens) {
        if (rc.token_source == TokenSourceKind::Files) {
            tokens = std::make_unique<FileTokenSource>(*rc.token_encodings, rc.attention.value_or(*rc.token_encodings));
        } else {
            tokens = std::make_unique<SyntheticTokenSource>(ws.encoder(), rc.synthetic_layers, rc.synthetic_heads,
                                                            rc.synthetic_seed);
        }
    }

    const auto& snapshot = ws.snapshot();
    std::vector<std::vector<MentionQuery>> per_chunk(chunk_count(articles.size(), rc.threads));
    std::vector<std::size_t> fallbacks(per_chunk.size(), 0);
    parallel_chunks(articles.size(), rc.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto& out = per_chunk[chunk];
        for (std::size_t ai = begin; ai < end; ++ai) {
            const Article& article = articles[ai];
            if (article.mentions.empty()) continue;
            const std::string text = article.text();
            std::optional<ArticleTokens> at;
            if (tokens) at = tokens->load(article);
            for (std::size_t mi = 0; mi < article.mentions.size(); ++mi) {
                const Mention& m = article.mentions[mi];
                MentionQuery q;
                q.article = ai;
                q.mention = mi;
                q.ref = {article.id, m.start, m.end};
                q.surface = m.text;
                q.gold = snapshot.resolve(m.cui);
                const std::string expanded = abbreviations.expand(article.id, m.text);
                q.query_text = expanded;
                const std::optional<TokenRange> range = at ? at->mention_tokens.at(mi) : std::nullopt;
                switch (rc.context) {
                case ContextMode::None: break;
                case ContextMode::Neighboring:
                    q.query_text = neighboring_context(text, m.start, m.end, rc.window, expanded);
                    break;
                case ContextMode::Attention:
                    if (range && at->attention) {
                        q.query_text = attention_enrich(*at->attention, at->tokens, *range, expanded, stopwords);
                    } else {
                        ++fallbacks[chunk];
                    }
                    break;
                case ContextMode::Implicit:
                    if (range && at->encodings) {
                        q.vector = implicit_query(*at->encodings, *range);
                    } else {
                        ++fallbacks[chunk];
                    }
                    break;
                }
                if (q.vector.dim() == 0) q.vector = ws.encoder().encode(q.query_text);
                out.push_back(std::move(q));
            }
        }
    });

    std::vector<MentionQuery> queries;
    std::size_t fallback_total = 0;
    for (std::size_t c = 0; c < per_chunk.size(); ++c) {
        fallback_total += fallbacks[c];
        for (auto& q : per_chunk[c]) queries.push_back(std::move(q));
    }
    if (fallback_total > 0) {
        log_line(std::to_string(fallback_total) + " mentions had no token alignment; queried by surface form");
    }
    return queries;
}

const PrototypeSpace& query_space(Workspace& ws) {
    return ws.config().context == ContextMode::Implicit ? ws.canonical_space() : ws.space();
}

std::vector<CandidateSet> retrieve(Workspace& ws, const std::vector<MentionQuery>& queries, std::size_t k) {
    std::vector<UnitVector> vectors;
    vectors.reserve(queries.size());
    for (const auto& q : queries) vectors.push_back(q.vector);
    auto sets = search_batch(query_space(ws), vectors, k, ws.config().threads);
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].query_id = query_id(queries[i].ref);
    return sets;
}

CandidateSet prefix(const CandidateSet& cands, std::size_t k) {
    CandidateSet out;
    out.query_id = cands.query_id;
    const std::size_t n = std::min(k, cands.candidates.size());
    out.candidates.assign(cands.candidates.begin(), cands.candidates.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

RerankedSet rerank(const Workspace& ws, RerankMode mode, const RerankParams& params, const CandidateSet& cands,
                   const std::string& gold) {
    switch (mode) {
    case RerankMode::Parametric: return parametric_rerank(cands, params);
    case RerankMode::Type: {
        const Entity& g = ws.snapshot().active_entity(gold);
        return type_rerank(cands, g.type_names, ws.snapshot(), ws.encoder());
    }
    case RerankMode::Group:
        return group_rerank(cands, ws.snapshot().active_entity(gold).group_name, ws.snapshot(), ws.encoder());
    case RerankMode::None: break;
    }
    return parametric_rerank(cands, {1.0, 0.0, 0.0});
}

std::vector<RankedResult> ranked_results(const Workspace& ws, const std::vector<MentionQuery>& queries,
                                         const std::vector<CandidateSet>& cands, RerankMode mode,
                                         const RerankParams& params, std::size_t k) {
    std::vector<RankedResult> out(queries.size());
    parallel_chunks(queries.size(), ws.config().threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto top = prefix(cands[i], k);
            out[i].mention = queries[i].ref;
            out[i].gold_cui = queries[i].gold;
            if (mode == RerankMode::None || top.candidates.empty()) {
                out[i].entities = dedup_entities(top, k);
            } else {
                out[i].entities = dedup_entities(rerank(ws, mode, params, top, queries[i].gold), k);
            }
        }
    });
    return out;
}

ordered_json breakdown_json(const Breakdown& b) {
    ordered_json j;
    j["exact"] = b.exact_fraction();
    j["related"] = b.related_fraction();
    j["missed"] = b.missed_fraction();
    j["counts"] = {{"exact", b.exact}, {"related", b.related}, {"missed", b.missed}};
    return j;
}

ordered_json params_json(const RerankParams& p) { return {{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

void build_index(const RunConfig& rc) {
    const fs::path dir = rc.space_cache.value_or(rc.output_dir / "space");
    ensure_dir(dir);
    ensure_dir(rc.output_dir);

    RunConfig fresh = rc;
    fresh.space_cache.reset();
    Workspace builder(fresh);
    const PrototypeSpace& space = builder.space();
    save_space(space, cache_prot(dir), cache_meta(dir));

    ordered_json manifest;
    manifest["command"] = "build-index";
    manifest["created_at"] = utc_timestamp();
    manifest["encoder"] = rc.encoder == EncoderKind::Store ? "store" : "reference";
    manifest["dim"] = space.dim();
    manifest["rows"] = space.size();
    manifest["active_entities"] = builder.snapshot().active_count();
    ordered_json inputs;
    inputs["ontology"] = {{"path", rc.ontology.string()}, {"sha256", sha256_file(rc.ontology)}};
    if (rc.relations) inputs["relations"] = {{"path", rc.relations->string()}, {"sha256", sha256_file(*rc.relations)}};
    if (rc.embeddings) inputs["embeddings"] = {{"path", rc.embeddings->string()}, {"sha256", sha256_file(*rc.embeddings)}};
    manifest["inputs"] = inputs;
    manifest["outputs"] = {
        {"space", {{"path", cache_prot(dir).string()}, {"sha256", sha256_file(cache_prot(dir))}}},
        {"alias_meta", {{"path", cache_meta(dir).string()}, {"sha256", sha256_file(cache_meta(dir))}}},
    };
    open_out(rc.output_dir / "manifest.json") << manifest.dump(2) << '\n';
    log_line("wrote " + std::to_string(space.size()) + " rows to " + dir.string());
}

void link(const RunConfig& rc) {
    Workspace ws(rc);
    const auto articles = load_articles(rc);
    const auto queries = build_queries(ws, articles);
    const auto cands = retrieve(ws, queries, rc.k);
    ensure_dir(rc.output_dir);
    auto out = open_out(rc.output_dir / "candidates.jsonl");
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries[i];
        ordered_json j;
        j["article_id"] = q.ref.article_id;
        j["start"] = q.ref.start;
        j["end"] = q.ref.end;
        j["mention"] = q.surface;
        j["query"] = q.query_text;
        j["gold"] = q.gold;
        j["candidates"] = ordered_json::array();
        for (const auto& c : cands[i].candidates) {
            j["candidates"].push_back({{"cui", c.cui}, {"alias", c.alias}, {"score", c.score}});
        }
        if (rc.rerank != RerankMode::None) {
            j["reranked"] = ordered_json::array();
            for (const auto& c : rerank(ws, rc.rerank, rc.params, prefix(cands[i], rc.rerank_k), q.gold).candidates) {
                j["reranked"].push_back(
                    {{"cui", c.cui}, {"alias", c.alias}, {"score", c.score}, {"adjusted", c.adjusted}});
            }
        }
        out << j.dump() << '\n';
    }
    log_line("wrote candidates for " + std::to_string(queries.size()) + " mentions");
}

void evaluate(const RunConfig& rc) {
    Workspace ws(rc);
    const auto articles = load_articles(rc);
    const auto queries = build_queries(ws, articles);
    if (queries.empty()) throw Error(ErrorCode::Evaluation, "corpus has no mentions to evaluate");
    const auto cands = retrieve(ws, queries, rc.k);
    const auto& snapshot = ws.snapshot();
    ensure_dir(rc.output_dir);

    ordered_json report;
    report["mentions"] = queries.size();
    report["articles"] = articles.size();
    report["context_mode"] = std::string(to_string(rc.context));
    report["rerank_mode"] = std::string(to_string(rc.rerank));
    report["k"] = rc.k;
    report["rerank_k"] = rc.rerank_k;

    // Parameters: configured, or the grid-search optimum.
    RerankParams params = rc.params;
    if (rc.grid_search) {
        std::vector<DevExample> dev;
        dev.reserve(queries.size());
        for (std::size_t i = 0; i < queries.size(); ++i) dev.push_back({prefix(cands[i], rc.rerank_k), queries[i].gold});
        const auto gs = grid_search(dev, rc.grid, rc.threads);
        params = gs.params;
        const auto ab = ablate(dev, params);
        report["grid_search"] = {{"best", params_json(gs.params)},
                                 {"r_at_1", gs.r_at_1},
                                 {"points", gs.points_evaluated}};
        report["ablation"] = {{"baseline", ab.baseline},
                              {"full", ab.full},
                              {"without_b", ab.without_b},
                              {"without_c", ab.without_c}};
        log_line("grid search: a=" + format_double(params.a) + " b=" + format_double(params.b) +
                 " c=" + format_double(params.c) + " R@1=" + format_double(gs.r_at_1));
    }
    report["params"] = params_json(params);

    const auto baseline = ranked_results(ws, queries, cands, RerankMode::None, params, rc.k);
    const auto reranked = rc.rerank == RerankMode::None
                              ? baseline
                              : ranked_results(ws, queries, cands, rc.rerank, params, rc.rerank_k);

    ordered_json recall_base, recall_rr;
    for (std::size_t n : rc.recall_n) {
        recall_base[std::to_string(n)] = recall_at(baseline, n);
        recall_rr[std::to_string(n)] = recall_at(reranked, n);
    }
    report["recall"] = {{"baseline", recall_base}, {"reranked", recall_rr}};

    // R@k read two ways: k alias rows, or k unique entities.
    {
        std::vector<RankedResult> by_entity(queries.size());
        const auto& space = query_space(ws);
        parallel_chunks(queries.size(), rc.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                by_entity[i] = {queries[i].ref, search_entities(space, queries[i].vector, rc.entity_k),
                                queries[i].gold};
            }
        });
        report["recall_at_k"] = {{"alias_level_k", rc.k},
                                 {"alias_level", recall_at(baseline, rc.k)},
                                 {"entity_level_k", rc.entity_k},
                                 {"entity_level", recall_at(by_entity, rc.entity_k)}};
    }

    const auto before = classify_matches(baseline, snapshot);
    const auto after = classify_matches(reranked, snapshot);
    report["breakdown"] = {{"baseline", breakdown_json(before.breakdown)},
                           {"reranked", breakdown_json(after.breakdown)}};
    const auto transition = transition_heatmap(before.outcomes, after.outcomes);
    report["transition"] = {{"order", {"exact", "related", "missed"}},
                            {"counts", transition.counts},
                            {"row_percent", transition.row_percent}};
    {
        auto out = open_out(rc.output_dir / "transition.csv");
        out << "from,to_exact,to_related,to_missed,pct_exact,pct_related,pct_missed\n";
        for (std::size_t r = 0; r < 3; ++r) {
            out << to_string(static_cast<Outcome>(r));
            for (std::size_t c = 0; c < 3; ++c) out << ',' << transition.counts[r][c];
            for (std::size_t c = 0; c < 3; ++c) out << ',' << format_double(transition.row_percent[r][c]);
            out << '\n';
        }
    }
    {
        auto out = open_out(rc.output_dir / "outcomes.jsonl");
        for (std::size_t i = 0; i < queries.size(); ++i) {
            ordered_json j;
            j["article_id"] = queries[i].ref.article_id;
            j["start"] = queries[i].ref.start;
            j["end"] = queries[i].ref.end;
            j["gold"] = queries[i].gold;
            j["baseline"] = {{"predicted", before.outcomes[i].predicted_cui},
                             {"outcome", std::string(to_string(before.outcomes[i].outcome))}};
            j["reranked"] = {{"predicted", after.outcomes[i].predicted_cui},
                             {"outcome", std::string(to_string(after.outcomes[i].outcome))}};
            out << j.dump() << '\n';
        }
    }

    // Reranking quality over alias-level top-k.
    {
        auto out = open_out(rc.output_dir / "topk_sweep.csv");
        out << "k,mode,r_at_1,r_at_5\n";
        ordered_json sweep = ordered_json::array();
        for (std::size_t kk : rc.topk_sweep) {
            if (kk > rc.k) {
                log_line("top-k sweep: skipping k=" + std::to_string(kk) + " > link.k");
                continue;
            }
            for (RerankMode mode : {RerankMode::None, RerankMode::Parametric, RerankMode::Type, RerankMode::Group}) {
                const auto rr = ranked_results(ws, queries, cands, mode, params, kk);
                const double r1 = recall_at(rr, 1), r5 = recall_at(rr, 5);
                out << kk << ',' << to_string(mode) << ',' << format_double(r1) << ',' << format_double(r5) << '\n';
                sweep.push_back({{"k", kk}, {"mode", std::string(to_string(mode))}, {"r_at_1", r1}, {"r_at_5", r5}});
            }
        }
        report["topk_sweep"] = sweep;
    }

    // Article-level similarity of gold- and prediction-substituted texts.
    {
        const ReferenceEncoder doc_encoder(rc.doc_dim);
        std::map<std::string, std::vector<std::size_t>> by_article;
        for (std::size_t i = 0; i < queries.size(); ++i) by_article[queries[i].ref.article_id].push_back(i);
        std::vector<const Article*> with_mentions;
        for (const auto& a : articles) {
            if (!a.mentions.empty()) with_mentions.push_back(&a);
        }
        std::vector<std::optional<ArticleSimRecord>> recs(with_mentions.size());
        std::vector<std::string> skipped_reason(with_mentions.size());
        parallel_chunks(with_mentions.size(), rc.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const Article& a = *with_mentions[i];
                std::vector<MatchOutcome> a_before, a_after;
                for (std::size_t qi : by_article.at(a.id)) {
                    a_before.push_back(before.outcomes[qi]);
                    a_after.push_back(after.outcomes[qi]);
                }
                try {
                    auto rec = article_similarity(a, a_after, snapshot, doc_encoder, rc.ag_replace_all);
                    std::size_t exact = 0;
                    for (const auto& o : a_before) exact += o.outcome == Outcome::Exact ? 1 : 0;
                    rec.r1_reranked = rec.r1;
                    rec.r1 = static_cast<double>(exact) / static_cast<double>(a_before.size());
                    recs[i] = std::move(rec);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::OverlappingSpans) throw;
                    skipped_reason[i] = e.message();
                }
            }
        });
        std::vector<ArticleSimRecord> records;
        ordered_json skipped = ordered_json::array();
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (recs[i]) {
                records.push_back(std::move(*recs[i]));
            } else {
                skipped.push_back(with_mentions[i]->id);
                log_line("skipped article: " + skipped_reason[i]);
            }
        }
        if (records.empty()) throw Error(ErrorCode::Evaluation, "no article could be scored for similarity");
        const auto sel = select_regions(std::move(records), rc.smoothing_window);
        auto out = open_out(rc.output_dir / "article_similarity.csv");
        out << "article_id,s_g,s_p,diff,r1,r1_reranked,region,smoothed_r1,smoothed_r1_reranked\n";
        ordered_json region_a = ordered_json::array(), region_b = ordered_json::array();
        for (std::size_t i = 0; i < sel.records.size(); ++i) {
            const auto& r = sel.records[i];
            out << r.article_id << ',' << format_double(r.s_g) << ',' << format_double(r.s_p) << ','
                << format_double(r.diff) << ',' << format_double(r.r1) << ','
                << format_double(r.r1_reranked.value_or(r.r1)) << ',' << to_string(r.region) << ','
                << format_double(sel.smoothed_r1[i]) << ','
                << format_double(sel.smoothed_r1_reranked.empty() ? sel.smoothed_r1[i] : sel.smoothed_r1_reranked[i])
                << '\n';
            if (r.region == Region::A) region_a.push_back(r.article_id);
            if (r.region == Region::B) region_b.push_back(r.article_id);
        }
        report["article_similarity"] = {{"articles", sel.records.size()},
                                        {"mean_diff", sel.mean},
                                        {"stddev_diff", sel.stddev},
                                        {"region_a", region_a},
                                        {"region_b", region_b},
                                        {"skipped", skipped}};
    }

    // Word-count buckets.
    {
        std::vector<std::string> surfaces;
        surfaces.reserve(queries.size());
        for (const auto& q : queries) surfaces.push_back(q.surface);
        auto out = open_out(rc.output_dir / "wordcount.csv");
        out << "run,words,total,exact_rate,related_rate\n";
        ordered_json wc = ordered_json::object();
        for (const auto& [label, run] : {std::pair{"baseline", &before}, std::pair{"reranked", &after}}) {
            ordered_json rows = ordered_json::array();
            const std::string run_label = std::string(label) + "_" + std::string(to_string(rc.context));
            for (const auto& b : wordcount_buckets(run->outcomes, surfaces, rc.min_bucket)) {
                out << run_label << ',' << b.words << ',' << b.total << ',' << format_double(b.exact_rate) << ','
                    << format_double(b.related_rate) << '\n';
                rows.push_back({{"words", b.words},
                                {"total", b.total},
                                {"exact_rate", b.exact_rate},
                                {"related_rate", b.related_rate}});
            }
            wc[run_label] = rows;
        }
        report["wordcount"] = wc;
    }

    open_out(rc.output_dir / "report.json") << report.dump(2) << '\n';
    log_line("R@1 baseline " + format_double(recall_at(baseline, 1)) + ", reranked " +
             format_double(recall_at(reranked, 1)));
}

void export_plots(const RunConfig& rc) {
    const fs::path plots = rc.output_dir / "plots";
    ensure_dir(plots);
    render_all_plots(rc.output_dir, plots);
    log_line("wrote plots to " + plots.string());
}

int exit_code_for(const std::exception& e) noexcept {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return err->code() == ErrorCode::Evaluation ? 1 : 2;
    return 1;
}

int run_command(std::string_view command, const Config& config) {
    try {
        const RunConfig rc = RunConfig::from(config);
        if (command == "build-index") build_index(rc);
        else if (command == "link") link(rc);
        else if (command == "evaluate") evaluate(rc);
        else if (command == "export-plots") export_plots(rc);
        else throw Error(ErrorCode::Config, "unknown command '" + std::string(command) + "'");
        return 0;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return exit_code_for(e);
    }
}

} // namespace protolink::app
