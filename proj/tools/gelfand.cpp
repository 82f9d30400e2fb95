// gelfand: batch runner for the (SL(2,R), SO(2)) toolkit.
//
//   gelfand <command> [--config FILE] [--seed N] [--out PATH] [--threads N] [--quiet] [--set key=value]...
//
// Exit codes: 0 success, 1 usage or config error, 2 verification gate failed.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gelfand/cli.hpp"

int main(int argc, char** argv) {
    namespace gc = gelfand::cli;
    CLI::App app{"Harmonic analysis and Levy processes on the hyperbolic plane"};
    app.set_help_flag("-h,--help", "Print help and exit");

    std::string command, config_path, out;
    std::string seed;
    unsigned threads = 1;
    bool quiet = false;
    std::vector<std::string> sets;

    std::string command_help = "One of:";
    for (const auto& c : gc::commands()) command_help += " " + c;
    app.add_option("command", command, command_help);
    app.add_option("--config", config_path, "Flat key = value config file");
    app.add_option("--seed", seed, "Seed (unsigned 64-bit), overrides the config");
    app.add_option("--out", out, "Output CSV path; the JSON summary goes to <out>.json");
    app.add_option("--threads", threads, "Worker threads (0 = all cores); never changes results");
    app.add_flag("--quiet", quiet, "Do not print the summary");
    app.add_option("--set", sets, "Override a config entry, key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    gc::Invocation inv;
    inv.threads = threads;
    inv.quiet = quiet;
    try {
        if (!config_path.empty()) inv.overrides = gc::read_config_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw gc::ConfigError("--set expects key=value, got '" + s + "'");
            const std::string key = gc::trim(s.substr(0, eq));
            if (!gc::default_config().contains(key)) throw gc::ConfigError("unknown key '" + key + "'");
            inv.overrides[key] = gc::trim(s.substr(eq + 1));
        }
    } catch (const gc::ConfigError& e) {
        std::cerr << "gelfand: " << e.what() << "\n";
        return 1;
    }
    if (!command.empty()) inv.overrides["command"] = command;
    if (!seed.empty()) inv.overrides["seed"] = seed;
    if (!out.empty()) inv.out = out;
    return gc::run(inv, std::cout, std::cerr);
}
