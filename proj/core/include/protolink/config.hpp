#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace protolink {

/// Flat `key = value` configuration. Keys use dots for sections
/// (`grid.a`, `paths.ontology`). `#` starts a comment line. Later
/// assignments override earlier ones; `set()` is how `--set` overrides land.
class Config {
public:
    Config() = default;

    static Config parse(std::string_view text, std::string_view source = "<string>");
    static Config load(const std::filesystem::path& path);

    void set(std::string key, std::string value);
    /// Parses `key=value` as given on the command line.
    void set_assignment(std::string_view assignment);

    bool has(std::string_view key) const;
    std::optional<std::string> find(std::string_view key) const;

    std::string get_string(std::string_view key) const;
    std::string get_string(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::size_t get_size(std::string_view key, std::size_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    /// Comma-separated list of reals.
    std::vector<double> get_doubles(std::string_view key) const;
    std::vector<std::size_t> get_sizes(std::string_view key, std::vector<std::size_t> fallback) const;

    /// Paths in the file are relative to the file's directory.
    std::filesystem::path get_path(std::string_view key) const;
    std::optional<std::filesystem::path> find_path(std::string_view key) const;

    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

    const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return values_; }

private:
    std::map<std::string, std::string, std::less<>> values_;
    std::filesystem::path base_dir_;
};

} // namespace protolink
