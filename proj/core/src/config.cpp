#include "protolink/config.hpp"

#include "protolink/error.hpp"
#include "text_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace protolink {

namespace {

double parse_double(std::string_view key, std::string_view text) {
    auto t = detail::trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw Error(ErrorCode::Config, "key '" + std::string(key) + "': not a number: '" + std::string(t) + "'");
    }
    return v;
}

std::size_t parse_size(std::string_view key, std::string_view text) {
    auto t = detail::trim(text);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw Error(ErrorCode::Config,
                    "key '" + std::string(key) + "': not a non-negative integer: '" + std::string(t) + "'");
    }
    return v;
}

} // namespace

Config Config::parse(std::string_view text, std::string_view source) {
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::Config,
                        std::string(source) + " line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = detail::trim(t.substr(0, eq));
        if (key.empty()) {
            throw Error(ErrorCode::Config, std::string(source) + " line " + std::to_string(line_no) + ": empty key");
        }
        cfg.set(std::string(key), std::string(detail::trim(t.substr(eq + 1))));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Config cfg = parse(ss.str(), path.string());
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

void Config::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

void Config::set_assignment(std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw Error(ErrorCode::Config, "override must be key=value: '" + std::string(assignment) + "'");
    }
    auto key = detail::trim(assignment.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::Config, "override has empty key");
    set(std::string(key), std::string(detail::trim(assignment.substr(eq + 1))));
}

bool Config::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> Config::find(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(std::string_view key) const {
    auto v = find(key);
    if (!v) throw Error(ErrorCode::Config, "missing required key '" + std::string(key) + "'");
    return *v;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
    auto v = find(key);
    return v ? *v : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const {
    auto v = find(key);
    return v ? parse_double(key, *v) : fallback;
}

std::size_t Config::get_size(std::string_view key, std::size_t fallback) const {
    auto v = find(key);
    return v ? parse_size(key, *v) : fallback;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    auto s = detail::ascii_lower(detail::trim(*v));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(ErrorCode::Config, "key '" + std::string(key) + "': not a boolean: '" + *v + "'");
}

std::vector<double> Config::get_doubles(std::string_view key) const {
    std::vector<double> out;
    for (const auto& part : detail::split(get_string(key), ',')) out.push_back(parse_double(key, part));
    return out;
}

std::vector<std::size_t> Config::get_sizes(std::string_view key, std::vector<std::size_t> fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    std::vector<std::size_t> out;
    for (const auto& part : detail::split(*v, ',')) out.push_back(parse_size(key, part));
    return out;
}

std::filesystem::path Config::get_path(std::string_view key) const {
    std::filesystem::path p = get_string(key);
    return p.is_absolute() ? p : base_dir_ / p;
}

std::optional<std::filesystem::path> Config::find_path(std::string_view key) const {
    if (!has(key) || get_string(key).empty()) return std::nullopt;
    return get_path(key);
}

} // namespace protolink
