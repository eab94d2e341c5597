#include "protolink/context.hpp"

#include "binary_io.hpp"
#include "jsonl.hpp"
#include "protolink/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace protolink {

AttentionTensor::AttentionTensor(std::size_t layers, std::size_t heads, std::size_t tokens, std::vector<float> values)
    : layers_(layers), heads_(heads), tokens_(tokens), values_(std::move(values)) {
    if (layers_ == 0 || heads_ == 0 || tokens_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "attention tensor needs positive layers, heads and tokens");
    }
    if (values_.size() != layers_ * heads_ * tokens_ * tokens_) {
        throw Error(ErrorCode::DimensionMismatch, "attention values do not match layers x heads x k x k");
    }
    for (float v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRecord, "attention tensor contains non-finite values");
    }
}

AttentionTensor load_attention(const std::filesystem::path& path) {
    auto in = detail::ByteReader::from_file(path);
    in.expect_magic("ATTN");
    const auto version = in.u8("version");
    if (version != 1) {
        throw Error(ErrorCode::BadVersion, in.source() + ": unsupported ATTN version " + std::to_string(version));
    }
    const std::size_t layers = in.u32("layers");
    const std::size_t heads = in.u32("heads");
    const std::size_t k = in.u32("k");
    std::vector<float> values(layers * heads * k * k);
    in.f32s(values, "attention values");
    in.expect_end();
    try {
        return AttentionTensor(layers, heads, k, std::move(values));
    } catch (const Error& e) {
        throw Error(e.code(), in.source() + ": " + e.message());
    }
}

void write_attention(const std::filesystem::path& path, const AttentionTensor& tensor) {
    detail::ByteWriter out;
    out.bytes("ATTN");
    out.u8(1);
    out.u32(static_cast<std::uint32_t>(tensor.layers()));
    out.u32(static_cast<std::uint32_t>(tensor.heads()));
    out.u32(static_cast<std::uint32_t>(tensor.tokens()));
    out.f32s(tensor.values());
    out.write_to(path);
}

const StopwordSet& default_stopwords() {
    static const StopwordSet words = {
        "a",       "about",   "above",   "after",   "again",   "against", "all",     "am",      "an",
        "and",     "any",     "are",     "as",      "at",      "be",      "because", "been",    "before",
        "being",   "below",   "between", "both",    "but",     "by",      "can",     "could",   "did",
        "do",      "does",    "doing",   "down",    "during",  "each",    "few",     "for",     "from",
        "further", "had",     "has",     "have",    "having",  "he",      "her",     "here",    "hers",
        "herself", "him",     "himself", "his",     "how",     "i",       "if",      "in",      "into",
        "is",      "it",      "its",     "itself",  "just",    "me",      "more",    "most",    "my",
        "myself",  "no",      "nor",     "not",     "now",     "of",      "off",     "on",      "once",
        "only",    "or",      "other",   "our",     "ours",    "ourselves", "out",   "over",    "own",
        "same",    "she",     "should",  "so",      "some",    "such",    "than",    "that",    "the",
        "their",   "theirs",  "them",    "themselves", "then", "there",   "these",   "they",    "this",
        "those",   "through", "to",      "too",     "under",   "until",   "up",      "very",    "was",
        "we",      "were",    "what",    "when",    "where",   "which",   "while",   "who",     "whom",
        "why",     "will",    "with",    "would",   "you",     "your",    "yours",   "yourself", "yourselves",
    };
    return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open stopword file: " + path.string());
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = detail::trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.insert(detail::ascii_lower(w));
    }
    return words;
}

std::string neighboring_context(std::string_view text, std::size_t start, std::size_t end, std::size_t window,
                                std::string_view mention) {
    if (start >= end || end > text.size()) {
        throw Error(ErrorCode::InvalidArgument, "invalid mention span [" + std::to_string(start) + ", " +
                                                    std::to_string(end) + ")");
    }
    const auto before = detail::split_whitespace(text.substr(0, start));
    const auto after = detail::split_whitespace(text.substr(end));

    std::vector<std::string_view> words;
    const std::size_t from = before.size() > window ? before.size() - window : 0;
    for (std::size_t i = from; i < before.size(); ++i) words.push_back(before[i]);
    words.push_back(mention.empty() ? text.substr(start, end - start) : mention);
    for (std::size_t i = 0; i < std::min(window, after.size()); ++i) words.push_back(after[i]);

    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

namespace {

std::size_t utf8_length(std::string_view s) noexcept {
    std::size_t n = 0;
    for (char c : s) {
        if ((static_cast<unsigned char>(c) & 0xC0u) != 0x80u) ++n;
    }
    return n;
}

} // namespace

std::vector<std::string> sort_mcbl(std::span<const std::string> items) {
    if (items.empty()) throw Error(ErrorCode::EmptyInput, "sort_mcbl of an empty list");
    std::map<std::string_view, std::size_t> counts;
    for (const auto& x : items) ++counts[x];
    std::size_t top = 0;
    for (const auto& [_, n] : counts) top = std::max(top, n);

    std::vector<std::string> out;
    for (const auto& [x, n] : counts) {
        if (n == top) out.emplace_back(x);
    }
    // counts iterates in ascending order, so a stable sort on length keeps
    // equal lengths lexicographic.
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return utf8_length(a) > utf8_length(b); });
    return out;
}

std::string attention_enrich(const AttentionTensor& attention, std::span<const std::string> tokens, TokenRange span,
                             std::string_view mention, const StopwordSet& stopwords) {
    const std::size_t k = tokens.size();
    if (attention.tokens() != k) {
        throw Error(ErrorCode::DimensionMismatch, "attention covers " + std::to_string(attention.tokens()) +
                                                      " tokens but " + std::to_string(k) + " were given");
    }
    if (span.first > span.last || span.last >= k) {
        throw Error(ErrorCode::InvalidArgument, "mention token span [" + std::to_string(span.first) + ", " +
                                                    std::to_string(span.last) + "] invalid for " +
                                                    std::to_string(k) + " tokens");
    }

    std::vector<std::string> layer_reps;
    layer_reps.reserve(attention.layers());
    std::vector<std::string> head_reps;
    std::vector<std::string> column_tokens;
    for (std::size_t layer = 0; layer < attention.layers(); ++layer) {
        head_reps.clear();
        for (std::size_t head = 0; head < attention.heads(); ++head) {
            column_tokens.clear();
            for (std::size_t col = span.first; col <= span.last; ++col) {
                std::size_t best_row = span.first;
                float best = attention.at(layer, head, span.first, col);
                for (std::size_t row = span.first + 1; row < k; ++row) {
                    const float v = attention.at(layer, head, row, col);
                    if (v > best) {
                        best = v;
                        best_row = row;
                    }
                }
                column_tokens.push_back(tokens[best_row]);
            }
            head_reps.push_back(sort_mcbl(column_tokens).front());
        }
        layer_reps.push_back(sort_mcbl(head_reps).front());
    }

    const auto ranked = sort_mcbl(layer_reps);
    std::vector<std::string> context;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) {
        if (!stopwords.contains(detail::ascii_lower(ranked[i]))) context.push_back(ranked[i]);
    }
    std::string out(mention);
    if (context.empty()) return out;
    out += ": ";
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (i > 0) out += ',';
        out += context[i];
    }
    return out;
}

UnitVector implicit_query(const TokenEncodings& encodings, TokenRange span) { return mean_pool(encodings, span); }

namespace {

struct WordSpan {
    std::string word;
    std::size_t start;
    std::size_t end;
};

std::vector<WordSpan> words_with_offsets(std::string_view text) {
    std::vector<WordSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && detail::is_space(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !detail::is_space(text[j])) ++j;
        if (j > i) out.push_back({std::string(text.substr(i, j - i)), i, j});
        i = j;
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

AttentionTensor synthetic_attention(std::size_t layers, std::size_t heads, std::size_t tokens, std::uint64_t seed) {
    std::vector<float> values(layers * heads * tokens * tokens);
    std::uint64_t state = seed;
    std::vector<double> logits(tokens);
    for (std::size_t row_block = 0; row_block < layers * heads * tokens; ++row_block) {
        double max_logit = -1e300;
        for (auto& l : logits) {
            l = 4.0 * static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
            max_logit = std::max(max_logit, l);
        }
        double sum = 0.0;
        for (auto& l : logits) sum += (l = std::exp(l - max_logit));
        for (std::size_t c = 0; c < tokens; ++c) {
            values[row_block * tokens + c] = static_cast<float>(logits[c] / sum);
        }
    }
    return AttentionTensor(layers, heads, tokens, std::move(values));
}

SyntheticTokenSource::SyntheticTokenSource(const TextEncoder& encoder, std::size_t layers, std::size_t heads,
                                           std::uint64_t seed)
    : encoder_(encoder), layers_(layers), heads_(heads), seed_(seed) {}

ArticleTokens SyntheticTokenSource::load(const Article& article) const {
    const std::string text = article.text();
    const auto words = words_with_offsets(text);
    if (words.empty()) throw Error(ErrorCode::EmptyInput, "article " + article.id + " has no tokens");

    ArticleTokens out;
    std::vector<float> data;
    data.reserve(words.size() * encoder_.dim());
    for (const auto& w : words) {
        out.tokens.push_back(w.word);
        const auto v = encoder_.encode(w.word);
        data.insert(data.end(), v.values().begin(), v.values().end());
    }
    out.encodings.emplace(encoder_.dim(), out.tokens, std::move(data));
    out.attention.emplace(synthetic_attention(layers_, heads_, words.size(), seed_ ^ fnv1a64(article.id)));

    for (const auto& m : article.mentions) {
        std::optional<TokenRange> range;
        for (std::size_t t = 0; t < words.size(); ++t) {
            if (words[t].end <= m.start || words[t].start >= m.end) continue;
            if (!range) range = TokenRange{t, t};
            range->last = t;
        }
        out.mention_tokens.push_back(range);
    }
    return out;
}

ArticleTokens FileTokenSource::load(const Article& article) const {
    ArticleTokens out;
    auto enc = load_token_encodings(token_dir_ / (article.id + ".toke"));
    out.tokens = enc.tokens();
    out.encodings.emplace(std::move(enc));
    const auto attn_path = attention_dir_ / (article.id + ".attn");
    if (std::filesystem::exists(attn_path)) {
        out.attention.emplace(load_attention(attn_path));
        if (out.attention->tokens() != out.tokens.size()) {
            throw Error(ErrorCode::DimensionMismatch, attn_path.string() + ": attention k does not match token count");
        }
    }

    std::map<std::pair<std::size_t, std::size_t>, TokenRange> by_offsets;
    const auto spans_path = token_dir_ / (article.id + ".spans.json");
    std::ifstream in(spans_path);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + spans_path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        if (j.contains("article_id") && j.at("article_id").get<std::string>() != article.id) {
            throw Error(ErrorCode::MalformedRecord, spans_path.string() + ": belongs to article " +
                                                        j.at("article_id").get<std::string>());
        }
        for (const auto& s : j.at("spans")) {
            TokenRange r{s.at("token_start").get<std::size_t>(), s.at("token_end").get<std::size_t>()};
            if (r.first > r.last || r.last >= out.tokens.size()) {
                throw Error(ErrorCode::MalformedRecord, spans_path.string() + ": token span out of range");
            }
            by_offsets[{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()}] = r;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, spans_path.string() + ": " + e.what());
    }
    for (const auto& m : article.mentions) {
        auto it = by_offsets.find({m.start, m.end});
        out.mention_tokens.push_back(it == by_offsets.end() ? std::nullopt : std::optional<TokenRange>(it->second));
    }
    return out;
}

} // namespace protolink
