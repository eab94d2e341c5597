#pragma once

#include "protolink/error.hpp"
#include "text_util.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace protolink::detail {

/// Calls `fn(const nlohmann::json&, std::size_t line_no)` for every non-blank
/// line. Parse failures become MalformedRecord with the 1-based line number.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::MalformedRecord,
                        path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!record.is_object()) {
            throw Error(ErrorCode::MalformedRecord,
                        path.filename().string() + " line " + std::to_string(line_no) + ": expected a JSON object");
        }
        try {
            fn(record, line_no);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedRecord,
                        path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

} // namespace protolink::detail
