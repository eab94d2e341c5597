#pragma once

// Little-endian primitives shared by the PROT, TOKE and ATTN formats.

#include "protolink/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protolink::detail {

class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f32s(std::span<const float> vs) {
        for (float v : vs) f32(v);
    }

    void write_to(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
    }

    const std::vector<char>& buffer() const noexcept { return buf_; }

private:
    std::vector<char> buf_;
};

class ByteReader {
public:
    ByteReader(std::vector<char> data, std::string source)
        : data_(std::move(data)), source_(std::move(source)) {}

    static ByteReader from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::Io, "cannot open: " + path.string());
        std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return ByteReader(std::move(data), path.string());
    }

    void expect_magic(std::string_view magic) {
        if (remaining() < magic.size() || std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
            throw Error(ErrorCode::BadMagic, source_ + ": expected magic \"" + std::string(magic) + "\"");
        }
        pos_ += magic.size();
    }

    std::uint8_t u8(std::string_view what) {
        need(1, what);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32(std::string_view what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(std::string_view what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string str(std::size_t len, std::string_view what) {
        need(len, what);
        std::string s(data_.data() + pos_, len);
        pos_ += len;
        return s;
    }
    void f32s(std::span<float> out, std::string_view what) {
        need(out.size() * 4, what);
        for (float& v : out) v = std::bit_cast<float>(u32(what));
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    const std::string& source() const noexcept { return source_; }

    void expect_end() const {
        if (remaining() != 0) {
            throw Error(ErrorCode::MalformedRecord,
                        source_ + ": " + std::to_string(remaining()) + " trailing bytes after last record");
        }
    }

private:
    void need(std::size_t n, std::string_view what) const {
        if (remaining() < n) {
            throw Error(ErrorCode::Truncated, source_ + ": truncated while reading " + std::string(what));
        }
    }

    std::vector<char> data_;
    std::string source_;
    std::size_t pos_ = 0;
};

} // namespace protolink::detail
