// Command line front end: one subcommand per experiment kind.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sdmp/errors.hpp"
#include "sdmp/harness.hpp"
#include "sdmp/parallel.hpp"
#include "sdmp/problems.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kNumerical = 3 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::string out;
    std::vector<std::string> overrides;
    int workers = 0;
    bool print_config = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sdmp::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::string& kind, const Options& opt) {
    std::string text = opt.config.empty() ? std::string("{}") : read_file(opt.config);
    text = sdmp::apply_override(text, "kind=\"" + kind + "\"");
    if (opt.seed) text = sdmp::apply_override(text, "seed=" + std::to_string(*opt.seed));
    if (opt.paths) text = sdmp::apply_override(text, "paths=" + std::to_string(*opt.paths));
    for (const auto& o : opt.overrides) text = sdmp::apply_override(text, o);
    const sdmp::ExperimentConfig config = sdmp::parse_config(text);
    config.validate();
    if (opt.print_config) {
        std::cout << sdmp::serialize_config(config);
        return kPass;
    }
    if (opt.workers > 0) sdmp::parallel::set_workers(opt.workers);
    const auto dir = sdmp::resolve_out_dir(opt.out, config);
    const sdmp::RunResult result = sdmp::run_experiment(config, dir);
    for (const auto& c : result.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    std::cout << "wrote " << result.files.size() << " files to " << dir.string() << "\n";
    return result.passed() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic delay maximum principle experiments"};
    app.require_subcommand(1);
    Options opt;
    std::string chosen;
    for (const auto& name : sdmp::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", opt.config, "JSON experiment configuration");
        sub->add_option("--seed", opt.seed, "noise seed");
        sub->add_option("--paths", opt.paths, "number of Monte Carlo paths");
        sub->add_option("--out", opt.out, "output directory (default: config out_dir, $SDMP_OUT_DIR, ./sdmp-out)");
        sub->add_option("--override", opt.overrides, "dotted KEY=VALUE applied to the configuration");
        sub->add_option("--workers", opt.workers, "worker threads (results do not depend on it)");
        sub->add_flag("--print-config", opt.print_config, "print the resolved configuration and exit");
        sub->callback([&chosen, name] { chosen = name; });
    }
    app.add_subcommand("problems", "list the built-in problems")->callback([] {
        for (const auto& n : sdmp::problem_names()) std::cout << n << "\n";
        std::cout << "lq\nexpression\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfig;
    }
    if (chosen.empty()) return kPass;
    try {
        return run(chosen, opt);
    } catch (const sdmp::ConfigError& e) {
        std::cerr << "sdmp: configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const sdmp::IOError& e) {
        std::cerr << "sdmp: output error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "sdmp: numerical error: " << e.what() << "\n";
        return kNumerical;
    }
}
