#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace protolink {

/// Tolerance on |norm - 1| for a vector to count as unit length.
inline constexpr double kUnitTolerance = 1e-6;
/// Input vectors further than this from unit norm are flagged at load.
inline constexpr double kNormWarnThreshold = 1e-3;

/// A unit-L2-norm embedding. Only constructible through normalization or a
/// checked adoption of already-unit values.
class UnitVector {
public:
    UnitVector() = default;

    static UnitVector normalize(std::span<const double> values);
    static UnitVector normalize(std::span<const float> values);
    /// Adopts values bit-for-bit; throws unless the norm is within kUnitTolerance.
    static UnitVector from_unit(std::vector<float> values);

    std::span<const float> values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    float operator[](std::size_t i) const noexcept { return values_[i]; }

    bool operator==(const UnitVector&) const = default;

private:
    explicit UnitVector(std::vector<float> values) : values_(std::move(values)) {}
    std::vector<float> values_;
};

/// Sequential double-precision dot product; the single scoring primitive.
double dot(std::span<const float> a, std::span<const float> b) noexcept;
double l2_norm(std::span<const float> v) noexcept;
/// Cosine of two unit vectors. Throws DimensionMismatch.
double cosine(const UnitVector& a, const UnitVector& b);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Deterministic character-trigram hashing encoder. The trimmed, ASCII
/// lowercased text is padded with '#' on both sides; each byte trigram adds
/// +1 or -1 (bit 63 of its FNV-1a hash) to bucket `hash % dim`.
UnitVector reference_encode(std::string_view text, std::size_t dim);

/// Anything that turns a phrase into a unit vector.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::size_t dim() const = 0;
    virtual UnitVector encode(std::string_view text) const = 0;
};

class ReferenceEncoder final : public TextEncoder {
public:
    explicit ReferenceEncoder(std::size_t dim = 64);
    std::size_t dim() const override { return dim_; }
    UnitVector encode(std::string_view text) const override { return reference_encode(text, dim_); }

private:
    std::size_t dim_;
};

/// Ordered (id, unit vector) entries sharing one dimension.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dim);

    void add(std::string id, const UnitVector& v);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    const std::string& id(std::size_t i) const { return ids_.at(i); }
    std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    UnitVector unit_vector(std::size_t i) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

    /// Non-fatal findings from loading (e.g. renormalized vectors).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };

    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
    std::vector<std::string> warnings_;
};

/// PROT v1: "PROT", u8 version=1, u32 dim, u64 count, then per record
/// u32 id length, id bytes, dim f32 values. All little-endian.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingStore& store);
/// Writes arbitrary (possibly non-unit) rows; `data` is row-major count x dim.
void write_embeddings_raw(const std::filesystem::path& path, std::size_t dim, std::span<const std::string> ids,
                          std::span<const float> data);

/// Encodes text by exact lookup in a store keyed by the text itself.
class LookupEncoder final : public TextEncoder {
public:
    explicit LookupEncoder(std::shared_ptr<const EmbeddingStore> store);
    std::size_t dim() const override { return store_->dim(); }
    UnitVector encode(std::string_view text) const override;

private:
    std::shared_ptr<const EmbeddingStore> store_;
};

/// Memoizes another encoder per distinct string. Thread-safe.
class CachingEncoder final : public TextEncoder {
public:
    explicit CachingEncoder(const TextEncoder& inner) : inner_(inner) {}
    std::size_t dim() const override { return inner_.dim(); }
    UnitVector encode(std::string_view text) const override;

private:
    const TextEncoder& inner_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, UnitVector> cache_;
};

/// Inclusive token index range [first, last].
struct TokenRange {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t length() const noexcept { return last - first + 1; }
    bool operator==(const TokenRange&) const = default;
};

/// Per-token encodings of one text. Rows are kept exactly as produced by the
/// token encoder (not normalized); pooling normalizes its result.
class TokenEncodings {
public:
    TokenEncodings(std::size_t dim, std::vector<std::string> tokens, std::vector<float> data);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<const float> data() const noexcept { return data_; }

private:
    std::size_t dim_;
    std::vector<std::string> tokens_;
    std::vector<float> data_;
};

/// TOKE v1: "TOKE", u8 version=1, u32 dim, u32 k, k x (u32 len, token bytes),
/// then k x dim f32 values. All little-endian.
TokenEncodings load_token_encodings(const std::filesystem::path& path);
void write_token_encodings(const std::filesystem::path& path, const TokenEncodings& enc);

/// Mean of the rows in `range`, then L2-normalized.
UnitVector mean_pool(const TokenEncodings& enc, TokenRange range);

} // namespace protolink
