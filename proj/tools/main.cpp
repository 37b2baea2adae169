#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "minerdr/error.hpp"

namespace {

int fail(const std::string& command, const std::string& kind, const std::string& message) {
    nlohmann::json doc = {{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
    std::cerr << doc.dump() << '\n';
    return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace minerdr::cli;

    CLI::App app{"Mining-load demand-response modeling"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string season;
    long long seed = -1;
    unsigned threads = 0;
    bool list_keys = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "override a config key (key=value), repeatable")->allow_extra_args(false);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    app.add_option("--season", season, "summer or non_summer")->check(CLI::IsMember({"summer", "non_summer"}));
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--list-keys", list_keys, "print the accepted config keys and exit");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ingest", "load raw CSV files into a canonical panel and gap report"},
        {"transform", "fit the per-series transforms and write the transformed panel"},
        {"test", "run the statistical test battery and correlation studies"},
        {"fit", "fit the demand-response model for one season"},
        {"simulate", "generate a synthetic panel from a model"},
        {"report", "merge artifacts into one report with plot-ready series"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);
    app.set_help_all_flag("--help-all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (list_keys) {
            for (const auto& [k, help] : known_keys()) std::printf("%-20s %s\n", k.c_str(), help.c_str());
            return 0;
        }
        return fail("", "usage", e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        RunConfig config;
        std::vector<std::pair<std::string, std::string>> settings;
        if (!config_path.empty()) settings = read_settings(config_path);
        for (const auto& o : overrides) settings.push_back(parse_assignment(o));
        if (!out_dir.empty()) settings.emplace_back("out", out_dir);
        if (!season.empty()) settings.emplace_back("season", season);
        if (seed >= 0) settings.emplace_back("seed", std::to_string(seed));
        if (threads > 0) settings.emplace_back("threads", std::to_string(threads));
        apply_settings(config, settings);

        if (command == "ingest") run_ingest(config);
        else if (command == "transform") run_transform(config);
        else if (command == "test") run_test(config);
        else if (command == "fit") run_fit(config);
        else if (command == "simulate") run_simulate(config);
        else run_report(config);
    } catch (const minerdr::Error& e) {
        return fail(command, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(command, "internal", e.what());
    }
    return 0;
}
