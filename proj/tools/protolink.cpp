#include "app/log.hpp"
#include "app/pipeline.hpp"

#include <protolink/config.hpp>
#include <protolink/error.hpp>

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App cli{"protolink: offline biomedical entity linking"};
    cli.require_subcommand(1);
    cli.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<unsigned> threads;
    cli.add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    cli.add_option("--set", overrides, "Override a config entry (key=value); repeatable")->take_all();
    cli.add_option("--threads", threads, "Worker threads (0 = all cores)");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"build-index", "Build and cache the prototype space"},
        {"link", "Retrieve candidates for every corpus mention"},
        {"evaluate", "Link, rerank and write evaluation reports"},
        {"export-plots", "Render figures from an evaluate run"},
    };
    for (const auto& [name, description] : commands) cli.add_subcommand(name, description);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return 2;
    }

    protolink::Config config;
    try {
        config = protolink::Config::load(config_path);
        for (const auto& o : overrides) config.set_assignment(o);
        if (threads) config.set("threads", std::to_string(*threads));
    } catch (const std::exception& e) {
        protolink::app::log_line(std::string("error: ") + e.what());
        return 2;
    }
    return protolink::app::run_command(cli.get_subcommands().front()->get_name(), config);
}
