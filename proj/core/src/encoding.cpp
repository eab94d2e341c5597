#include "protolink/encoding.hpp"

#include "binary_io.hpp"
#include "protolink/error.hpp"
#include "text_util.hpp"

#include <cmath>

namespace protolink {

namespace {

constexpr std::uint8_t kFormatVersion = 1;
constexpr char kBoundary = '#';

template <typename T>
UnitVector normalize_impl(std::span<const T> values, std::vector<float>& out) {
    double sq = 0.0;
    for (T v : values) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw Error(ErrorCode::InvalidArgument, "vector has non-finite components");
    if (norm == 0.0) throw Error(ErrorCode::ZeroNorm, "cannot normalize a zero vector");
    out.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<float>(static_cast<double>(values[i]) / norm);
    return UnitVector::from_unit(std::move(out));
}

} // namespace

UnitVector UnitVector::normalize(std::span<const double> values) {
    std::vector<float> out;
    return normalize_impl(values, out);
}

UnitVector UnitVector::normalize(std::span<const float> values) {
    std::vector<float> out;
    return normalize_impl(values, out);
}

UnitVector UnitVector::from_unit(std::vector<float> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty vector");
    const double n = l2_norm(values);
    if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
        throw Error(ErrorCode::InvalidArgument, "vector norm " + std::to_string(n) + " is not unit");
    }
    return UnitVector(std::move(values));
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
    double s = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

double l2_norm(std::span<const float> v) noexcept { return std::sqrt(dot(v, v)); }

double cosine(const UnitVector& a, const UnitVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine of dim " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
    return dot(a.values(), b.values());
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

UnitVector reference_encode(std::string_view text, std::size_t dim) {
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "reference encoder needs dim >= 2");
    auto trimmed = detail::trim(text);
    if (trimmed.empty()) throw Error(ErrorCode::InvalidArgument, "cannot encode empty text");

    std::string padded;
    padded.reserve(trimmed.size() + 2);
    padded += kBoundary;
    padded += detail::ascii_lower(trimmed);
    padded += kBoundary;

    std::vector<double> acc(dim, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        const std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3));
        acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
    }
    try {
        return UnitVector::normalize(std::span<const double>(acc));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroNorm) throw;
        throw Error(ErrorCode::ZeroNorm, "trigram features cancel out for '" + std::string(trimmed) + "'");
    }
}

ReferenceEncoder::ReferenceEncoder(std::size_t dim) : dim_(dim) {
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "reference encoder needs dim >= 2");
}

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
}

void EmbeddingStore::add(std::string id, const UnitVector& v) {
    if (v.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "id " + id + ": dim " + std::to_string(v.dim()) + " != store dim " + std::to_string(dim_));
    }
    if (index_.find(id) != index_.end()) throw Error(ErrorCode::DuplicateId, "duplicate embedding id " + id);
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), v.values().begin(), v.values().end());
}

UnitVector EmbeddingStore::unit_vector(std::size_t i) const {
    auto row = vector(i);
    return UnitVector::from_unit(std::vector<float>(row.begin(), row.end()));
}

std::optional<std::size_t> EmbeddingStore::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
    auto in = detail::ByteReader::from_file(path);
    in.expect_magic("PROT");
    const auto version = in.u8("version");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::BadVersion, in.source() + ": unsupported PROT version " + std::to_string(version));
    }
    const std::size_t dim = in.u32("dim");
    const std::uint64_t count = in.u64("count");
    if (dim == 0) throw Error(ErrorCode::MalformedRecord, in.source() + ": dim is zero");

    EmbeddingStore store(dim);
    std::vector<float> row(dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::string what = "record " + std::to_string(r);
        const auto len = in.u32(what);
        std::string id = in.str(len, what);
        in.f32s(row, what);
        if (store.index_of(id)) throw Error(ErrorCode::DuplicateId, in.source() + ": duplicate id " + id);
        const double n = l2_norm(row);
        if (!std::isfinite(n)) throw Error(ErrorCode::MalformedRecord, in.source() + ": non-finite values in " + id);
        if (n == 0.0) throw Error(ErrorCode::ZeroNorm, in.source() + ": zero-norm vector for id " + id);
        const double dev = std::abs(n - 1.0);
        if (dev > kNormWarnThreshold) {
            store.add_warning("id " + id + ": input norm " + std::to_string(n) + " renormalized");
        }
        store.add(std::move(id), dev <= kUnitTolerance ? UnitVector::from_unit(row)
                                                       : UnitVector::normalize(std::span<const float>(row)));
    }
    in.expect_end();
    return store;
}

void write_embeddings_raw(const std::filesystem::path& path, std::size_t dim, std::span<const std::string> ids,
                          std::span<const float> data) {
    if (data.size() != ids.size() * dim) {
        throw Error(ErrorCode::DimensionMismatch, "row data does not match ids x dim");
    }
    detail::ByteWriter out;
    out.bytes("PROT");
    out.u8(kFormatVersion);
    out.u32(static_cast<std::uint32_t>(dim));
    out.u64(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.u32(static_cast<std::uint32_t>(ids[i].size()));
        out.bytes(ids[i]);
        out.f32s(data.subspan(i * dim, dim));
    }
    out.write_to(path);
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
    std::vector<std::string> ids;
    std::vector<float> data;
    ids.reserve(store.size());
    data.reserve(store.size() * store.dim());
    for (std::size_t i = 0; i < store.size(); ++i) {
        ids.push_back(store.id(i));
        auto row = store.vector(i);
        data.insert(data.end(), row.begin(), row.end());
    }
    write_embeddings_raw(path, store.dim(), ids, data);
}

LookupEncoder::LookupEncoder(std::shared_ptr<const EmbeddingStore> store) : store_(std::move(store)) {
    if (!store_) throw Error(ErrorCode::InvalidArgument, "lookup encoder needs a store");
}

UnitVector LookupEncoder::encode(std::string_view text) const {
    auto idx = store_->index_of(text);
    if (!idx) throw Error(ErrorCode::MissingEmbedding, "no embedding for text '" + std::string(text) + "'");
    return store_->unit_vector(*idx);
}

UnitVector CachingEncoder::encode(std::string_view text) const {
    {
        std::lock_guard lock(mu_);
        auto it = cache_.find(std::string(text));
        if (it != cache_.end()) return it->second;
    }
    UnitVector v = inner_.encode(text);
    std::lock_guard lock(mu_);
    cache_.emplace(std::string(text), v);
    return v;
}

TokenEncodings::TokenEncodings(std::size_t dim, std::vector<std::string> tokens, std::vector<float> data)
    : dim_(dim), tokens_(std::move(tokens)), data_(std::move(data)) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "token encoding dim must be positive");
    if (tokens_.empty()) throw Error(ErrorCode::EmptyInput, "token encodings need at least one token");
    if (data_.size() != tokens_.size() * dim_) {
        throw Error(ErrorCode::DimensionMismatch, "token encodings: data size does not match tokens x dim");
    }
    for (float v : data_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRecord, "token encodings contain non-finite values");
    }
}

TokenEncodings load_token_encodings(const std::filesystem::path& path) {
    auto in = detail::ByteReader::from_file(path);
    in.expect_magic("TOKE");
    const auto version = in.u8("version");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::BadVersion, in.source() + ": unsupported TOKE version " + std::to_string(version));
    }
    const std::size_t dim = in.u32("dim");
    const std::size_t k = in.u32("token count");
    std::vector<std::string> tokens;
    tokens.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::string what = "token " + std::to_string(i);
        tokens.push_back(in.str(in.u32(what), what));
    }
    std::vector<float> data(k * dim);
    in.f32s(data, "token vectors");
    in.expect_end();
    try {
        return TokenEncodings(dim, std::move(tokens), std::move(data));
    } catch (const Error& e) {
        throw Error(e.code(), in.source() + ": " + e.message());
    }
}

void write_token_encodings(const std::filesystem::path& path, const TokenEncodings& enc) {
    detail::ByteWriter out;
    out.bytes("TOKE");
    out.u8(kFormatVersion);
    out.u32(static_cast<std::uint32_t>(enc.dim()));
    out.u32(static_cast<std::uint32_t>(enc.size()));
    for (const auto& t : enc.tokens()) {
        out.u32(static_cast<std::uint32_t>(t.size()));
        out.bytes(t);
    }
    out.f32s(enc.data());
    out.write_to(path);
}

UnitVector mean_pool(const TokenEncodings& enc, TokenRange range) {
    if (range.last < range.first) throw Error(ErrorCode::InvalidArgument, "empty token span");
    if (range.last >= enc.size()) {
        throw Error(ErrorCode::InvalidArgument, "token span [" + std::to_string(range.first) + ", " +
                                                    std::to_string(range.last) + "] out of bounds for " +
                                                    std::to_string(enc.size()) + " tokens");
    }
    std::vector<double> mean(enc.dim(), 0.0);
    for (std::size_t t = range.first; t <= range.last; ++t) {
        auto row = enc.row(t);
        for (std::size_t j = 0; j < enc.dim(); ++j) mean[j] += row[j];
    }
    const double count = static_cast<double>(range.length());
    for (double& v : mean) v /= count;
    return UnitVector::normalize(std::span<const double>(mean));
}

} // namespace protolink
