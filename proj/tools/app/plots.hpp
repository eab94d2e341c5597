#pragma once

#include <filesystem>

namespace protolink::app {

/// Reads the CSV outputs of `evaluate` in `eval_dir` and writes SVG figures
/// to `plot_dir`. Throws Io if an input table is missing.
void render_all_plots(const std::filesystem::path& eval_dir, const std::filesystem::path& plot_dir);

} // namespace protolink::app
