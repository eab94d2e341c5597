#pragma once

#include "run_config.hpp"

#include <protolink/config.hpp>

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>

namespace protolink::app {

/// Builds the prototype space, writes the cache under <output>/space/ and a
/// manifest with content hashes to <output>/manifest.json.
void build_index(const RunConfig& rc);

/// Writes <output>/candidates.jsonl: one line per mention with its top-k
/// alias candidates (and the reranked list when a rerank mode is set).
void link(const RunConfig& rc);

/// Writes report.json, outcomes.jsonl, topk_sweep.csv, transition.csv,
/// article_similarity.csv and wordcount.csv under <output>/.
void evaluate(const RunConfig& rc);

/// Renders SVG figures from an evaluate run into <output>/plots/.
void export_plots(const RunConfig& rc);

/// 0 success, 1 evaluation-level failure, 2 input or config error.
int exit_code_for(const std::exception& e) noexcept;

/// Runs one named command ("build-index", "link", "evaluate",
/// "export-plots"), logging failures to stderr. Returns the exit code.
int run_command(std::string_view command, const Config& config);

std::string sha256_file(const std::filesystem::path& path);

} // namespace protolink::app
