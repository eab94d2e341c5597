#include "run_config.hpp"

#include <protolink/error.hpp>

#include <algorithm>

namespace protolink::app {

std::string_view to_string(RerankMode m) noexcept {
    switch (m) {
    case RerankMode::None: return "none";
    case RerankMode::Parametric: return "parametric";
    case RerankMode::Type: return "type";
    case RerankMode::Group: return "group";
    }
    return "none";
}

std::string_view to_string(ContextMode m) noexcept {
    switch (m) {
    case ContextMode::None: return "none";
    case ContextMode::Neighboring: return "nc";
    case ContextMode::Attention: return "ac";
    case ContextMode::Implicit: return "ic";
    }
    return "none";
}

namespace {

std::optional<std::filesystem::path> existing(const Config& cfg, std::string_view key) {
    auto p = cfg.find_path(key);
    if (p && !std::filesystem::exists(*p)) {
        throw Error(ErrorCode::Io, "'" + std::string(key) + "' does not exist: " + p->string());
    }
    return p;
}

template <typename Enum>
Enum parse_choice(const Config& cfg, std::string_view key, std::string_view fallback,
                  std::initializer_list<std::pair<std::string_view, Enum>> choices) {
    const auto v = cfg.get_string(key, fallback);
    for (const auto& [name, value] : choices) {
        if (v == name) return value;
    }
    throw Error(ErrorCode::Config, "key '" + std::string(key) + "': unknown value '" + v + "'");
}

} // namespace

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig rc;
    auto ontology = existing(cfg, "paths.ontology");
    if (!ontology) throw Error(ErrorCode::Config, "missing required key 'paths.ontology'");
    rc.ontology = *ontology;
    rc.relations = existing(cfg, "paths.relations");
    rc.corpus = existing(cfg, "paths.corpus");
    rc.embeddings = existing(cfg, "paths.embeddings");
    rc.text_embeddings = existing(cfg, "paths.text_embeddings");
    rc.space_cache = cfg.find_path("paths.space_cache");
    rc.token_encodings = existing(cfg, "paths.token_encodings");
    rc.attention = existing(cfg, "paths.attention");
    rc.stopwords = existing(cfg, "context.stopwords");
    if (!rc.stopwords) rc.stopwords = existing(cfg, "paths.stopwords");
    rc.abbreviations = existing(cfg, "paths.abbreviations");
    rc.output_dir = cfg.find_path("paths.output").value_or(std::filesystem::path("out"));

    rc.encoder = parse_choice<EncoderKind>(cfg, "encoder.kind", "reference",
                                           {{"reference", EncoderKind::Reference}, {"store", EncoderKind::Store}});
    rc.dim = cfg.get_size("encoder.dim", rc.dim);
    rc.doc_dim = cfg.get_size("eval.doc_dim", rc.doc_dim);
    if (rc.encoder == EncoderKind::Store && (!rc.embeddings || !rc.text_embeddings)) {
        throw Error(ErrorCode::Config, "encoder.kind = store needs paths.embeddings and paths.text_embeddings");
    }

    rc.k = cfg.get_size("link.k", rc.k);
    rc.rerank_k = cfg.get_size("rerank.k", rc.rerank_k);
    if (rc.k == 0 || rc.rerank_k == 0) throw Error(ErrorCode::Config, "link.k and rerank.k must be at least 1");
    rc.rerank = parse_choice<RerankMode>(cfg, "rerank.mode", "none",
                                         {{"none", RerankMode::None},
                                          {"parametric", RerankMode::Parametric},
                                          {"type", RerankMode::Type},
                                          {"group", RerankMode::Group}});
    rc.params = {cfg.get_double("rerank.a", rc.params.a), cfg.get_double("rerank.b", rc.params.b),
                 cfg.get_double("rerank.c", rc.params.c)};
    try {
        rc.params.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.message());
    }
    rc.grid = ParamGrid::from_config(cfg);
    rc.grid_search = cfg.get_bool("rerank.grid_search", rc.grid_search);

    rc.context = parse_choice<ContextMode>(cfg, "context.mode", "none",
                                           {{"none", ContextMode::None},
                                            {"nc", ContextMode::Neighboring},
                                            {"ac", ContextMode::Attention},
                                            {"ic", ContextMode::Implicit}});
    rc.window = cfg.get_size("context.window", rc.window);
    rc.token_source = parse_choice<TokenSourceKind>(cfg, "context.tokens", rc.token_encodings ? "files" : "synthetic",
                                                    {{"synthetic", TokenSourceKind::Synthetic},
                                                     {"files", TokenSourceKind::Files}});
    if (rc.token_source == TokenSourceKind::Files && !rc.token_encodings) {
        throw Error(ErrorCode::Config, "context.tokens = files needs paths.token_encodings");
    }
    rc.synthetic_layers = cfg.get_size("context.layers", rc.synthetic_layers);
    rc.synthetic_heads = cfg.get_size("context.heads", rc.synthetic_heads);
    rc.synthetic_seed = cfg.get_size("context.seed", rc.synthetic_seed);

    rc.ag_replace_all = cfg.get_bool("eval.ag_replace_all", rc.ag_replace_all);
    rc.recall_n = cfg.get_sizes("eval.recall_at", rc.recall_n);
    rc.topk_sweep = cfg.get_sizes("eval.topk_sweep", rc.topk_sweep);
    rc.entity_k = cfg.get_size("eval.entity_k", rc.entity_k);
    rc.min_bucket = cfg.get_size("eval.min_bucket", rc.min_bucket);
    rc.smoothing_window = cfg.get_size("eval.smoothing_window", rc.smoothing_window);
    if (std::find(rc.recall_n.begin(), rc.recall_n.end(), std::size_t{0}) != rc.recall_n.end() ||
        std::find(rc.topk_sweep.begin(), rc.topk_sweep.end(), std::size_t{0}) != rc.topk_sweep.end()) {
        throw Error(ErrorCode::Config, "recall cut-offs and sweep points must be at least 1");
    }
    if (rc.smoothing_window == 0) throw Error(ErrorCode::Config, "eval.smoothing_window must be at least 1");

    rc.threads = static_cast<unsigned>(cfg.get_size("threads", 0));
    return rc;
}

} // namespace protolink::app
