#pragma once

#include "protolink/corpus.hpp"
#include "protolink/encoding.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace protolink {

/// Attention weights [layer][head][row][col] over k tokens. Row r holds how
/// token r attends to every column.
class AttentionTensor {
public:
    AttentionTensor(std::size_t layers, std::size_t heads, std::size_t tokens, std::vector<float> values);

    std::size_t layers() const noexcept { return layers_; }
    std::size_t heads() const noexcept { return heads_; }
    std::size_t tokens() const noexcept { return tokens_; }
    float at(std::size_t layer, std::size_t head, std::size_t row, std::size_t col) const noexcept {
        return values_[((layer * heads_ + head) * tokens_ + row) * tokens_ + col];
    }
    std::span<const float> values() const noexcept { return values_; }

private:
    std::size_t layers_;
    std::size_t heads_;
    std::size_t tokens_;
    std::vector<float> values_;
};

/// ATTN v1: "ATTN", u8 version=1, u32 layers, u32 heads, u32 k, then
/// layers*heads*k*k f32 values. All little-endian.
AttentionTensor load_attention(const std::filesystem::path& path);
void write_attention(const std::filesystem::path& path, const AttentionTensor& tensor);

using StopwordSet = std::unordered_set<std::string>;

/// Built-in English stopword list (same words as data/stopwords_en.txt).
const StopwordSet& default_stopwords();
/// One word per line; blank lines and '#' comments ignored; lowercased.
StopwordSet load_stopwords(const std::filesystem::path& path);

/// "<w words before> <mention> <w words after>", whitespace-tokenized and
/// clipped at the text boundaries. `mention` replaces the span's surface
/// when non-empty (e.g. after abbreviation expansion).
std::string neighboring_context(std::string_view text, std::size_t start, std::size_t end, std::size_t window = 2,
                                std::string_view mention = {});

/// Most common items, longest first, equal lengths in ascending order.
/// Throws EmptyInput on an empty list.
std::vector<std::string> sort_mcbl(std::span<const std::string> items);

/// Attention-based context selection. For every layer and head, each mention
/// column's highest-attention row (rows from the span start to the end of the
/// text, lowest row on ties) names a token; heads, then layers, are each
/// reduced to their top sort_mcbl token, the top two layer tokens minus
/// stopwords become the context. Returns "<mention>: t1,t2", or the mention
/// alone when no context survives.
std::string attention_enrich(const AttentionTensor& attention, std::span<const std::string> tokens, TokenRange span,
                             std::string_view mention, const StopwordSet& stopwords);

/// Mean-pooled token encodings of the span, normalized.
UnitVector implicit_query(const TokenEncodings& encodings, TokenRange span);

/// Token-level view of one article for the attention and implicit paths.
struct ArticleTokens {
    std::vector<std::string> tokens;
    std::optional<TokenEncodings> encodings;
    std::optional<AttentionTensor> attention;
    /// Parallel to Article::mentions; nullopt when a mention has no tokens.
    std::vector<std::optional<TokenRange>> mention_tokens;
};

class TokenSource {
public:
    virtual ~TokenSource() = default;
    virtual ArticleTokens load(const Article& article) const = 0;
};

/// Reads "<id>.toke" and "<id>.spans.json" from `token_dir` and, when
/// present, "<id>.attn" from `attention_dir`. The spans sidecar is
/// {"article_id": ..., "spans": [{"start", "end", "token_start",
/// "token_end"}]} with byte offsets and inclusive token indices.
class FileTokenSource final : public TokenSource {
public:
    explicit FileTokenSource(std::filesystem::path token_dir, std::filesystem::path attention_dir = {})
        : token_dir_(std::move(token_dir)),
          attention_dir_(attention_dir.empty() ? token_dir_ : std::move(attention_dir)) {}
    ArticleTokens load(const Article& article) const override;

private:
    std::filesystem::path token_dir_;
    std::filesystem::path attention_dir_;
};

/// Offline stand-in for a transformer: whitespace words are the tokens, each
/// encoded with `encoder`; attention rows are seeded softmax distributions.
class SyntheticTokenSource final : public TokenSource {
public:
    SyntheticTokenSource(const TextEncoder& encoder, std::size_t layers = 2, std::size_t heads = 2,
                         std::uint64_t seed = 0);
    ArticleTokens load(const Article& article) const override;

private:
    const TextEncoder& encoder_;
    std::size_t layers_;
    std::size_t heads_;
    std::uint64_t seed_;
};

/// Deterministic softmax-row attention tensor for tests and the synthetic source.
AttentionTensor synthetic_attention(std::size_t layers, std::size_t heads, std::size_t tokens, std::uint64_t seed);

} // namespace protolink
