#pragma once

#include <protolink/config.hpp>
#include <protolink/rerank.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace protolink::app {

enum class RerankMode { None, Parametric, Type, Group };
enum class ContextMode { None, Neighboring, Attention, Implicit };
enum class EncoderKind { Reference, Store };
enum class TokenSourceKind { Synthetic, Files };

std::string_view to_string(RerankMode m) noexcept;
std::string_view to_string(ContextMode m) noexcept;

/// Typed view of the flat config used by every command.
struct RunConfig {
    std::filesystem::path ontology;
    std::optional<std::filesystem::path> relations;
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> embeddings;      ///< PROT, ids "<cui>#<alias-index>"
    std::optional<std::filesystem::path> text_embeddings; ///< PROT keyed by text (queries, type names)
    std::optional<std::filesystem::path> space_cache;     ///< directory written by build-index
    std::optional<std::filesystem::path> token_encodings; ///< directory of .toke + .spans.json
    std::optional<std::filesystem::path> attention;       ///< directory of .attn
    std::optional<std::filesystem::path> stopwords;
    std::optional<std::filesystem::path> abbreviations;
    std::filesystem::path output_dir;

    EncoderKind encoder = EncoderKind::Reference;
    std::size_t dim = 64;
    std::size_t doc_dim = 256;

    std::size_t k = 128;        ///< alias-level candidates retrieved per mention
    std::size_t rerank_k = 10;  ///< alias-level candidates handed to reranking
    RerankMode rerank = RerankMode::None;
    RerankParams params{5.0, 0.1, 0.05};
    ParamGrid grid = ParamGrid::defaults();
    bool grid_search = false;

    ContextMode context = ContextMode::None;
    std::size_t window = 2;
    TokenSourceKind token_source = TokenSourceKind::Synthetic;
    std::size_t synthetic_layers = 2;
    std::size_t synthetic_heads = 2;
    std::uint64_t synthetic_seed = 0;

    bool ag_replace_all = false;
    std::vector<std::size_t> recall_n{1, 5};
    std::vector<std::size_t> topk_sweep{1, 2, 5, 10, 15, 20, 32, 64, 128};
    std::size_t entity_k = 128;
    std::size_t min_bucket = 100;
    std::size_t smoothing_window = 200;

    unsigned threads = 0;

    /// Validates values and checks that every referenced input exists.
    static RunConfig from(const Config& config);
};

} // namespace protolink::app
