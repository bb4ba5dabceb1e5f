#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avsfe/config.hpp"
#include "avsfe/error.hpp"
#include "avsfe/problem.hpp"
#include "avsfe/study.hpp"

#ifndef AVSFE_CONFIG_DIR
#define AVSFE_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;

int threads_from_env()
{
    if (const char* env = std::getenv("AVSFE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring AVSFE_THREADS='" << env << "'\n";
    }
    return 1;
}

struct CommonFlags {
    int threads = 0;
    bool deterministic = false;
    std::string out;
};

void apply_common(avsfe::RunConfig& config, const CommonFlags& flags, const fs::path& default_out)
{
    config.threads = flags.threads > 0 ? flags.threads : threads_from_env();
    config.deterministic = true;
    config.out_dir = flags.out.empty() ? default_out : fs::path(flags.out);
}

/// Runs one study, mapping library errors onto exit codes.
int run_one(avsfe::RunConfig config)
{
    try {
        avsfe::validate_config(config);
        const auto result = avsfe::run_study(config, &std::cout);
        std::cout << "wrote " << (config.out_dir / "records.csv").string() << " (" << result.levels.size()
                  << " rows)\n";
        return kExitOk;
    } catch (const avsfe::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const avsfe::SolverError& err) {
        std::cerr << "solver failure: " << err.what() << '\n';
        return kExitSolver;
    } catch (const avsfe::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"AVS-FE solver for 2D convection-diffusion"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string config_path;
    int max_refine = -1;
    bool run_deep = false;
    auto* run = app.add_subcommand("run", "Run the refinement study described by a config file");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--threads", run_flags.threads, "Worker threads (default: AVSFE_THREADS or 1)");
    run->add_flag("--deterministic", run_flags.deterministic, "Fixed-order assembly (always on)");
    run->add_option("--out", run_flags.out, "Output directory (default: results/<config name>)");
    run->add_option("--max-refine", max_refine, "Override the refinement count");
    run->add_flag("--deep", run_deep, "Also run the config's extra_refinements levels");

    CommonFlags suite_flags;
    std::string config_dir = AVSFE_CONFIG_DIR;
    bool suite_deep = false;
    auto* suite = app.add_subcommand("paper-suite", "Run every shipped study config");
    suite->add_option("--configs", config_dir, "Directory of .cfg files");
    suite->add_option("--threads", suite_flags.threads, "Worker threads (default: AVSFE_THREADS or 1)");
    suite->add_flag("--deterministic", suite_flags.deterministic, "Fixed-order assembly (always on)");
    suite->add_option("--out", suite_flags.out, "Output root (default: results)");
    suite->add_flag("--deep", suite_deep, "Include the extra_refinements levels");

    auto* list = app.add_subcommand("list-scenarios", "Print the available scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*list) {
        for (const auto& s : avsfe::list_scenarios()) {
            std::cout << s.name;
            if (!s.section.empty()) std::cout << " (§" << s.section << ")";
            std::cout << "\n    parameters: " << s.parameters << "\n    " << s.description << '\n';
        }
        return kExitOk;
    }

    if (*run) {
        avsfe::RunConfig config;
        try {
            config = avsfe::load_config(config_path);
        } catch (const avsfe::ConfigError& err) {
            std::cerr << "config error: " << err.what() << '\n';
            return kExitConfig;
        }
        if (max_refine >= 0) {
            config.refinements = max_refine;
            config.extra_refinements = 0;
        }
        config.deep = run_deep;
        apply_common(config, run_flags, fs::path("results") / config.name);
        return run_one(config);
    }

    std::vector<fs::path> configs;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(config_dir, ec)) {
        if (entry.path().extension() == ".cfg") configs.push_back(entry.path());
    }
    if (ec || configs.empty()) {
        std::cerr << "config error: no .cfg files in '" << config_dir << "'\n";
        return kExitConfig;
    }
    std::sort(configs.begin(), configs.end());

    const fs::path root = suite_flags.out.empty() ? fs::path("results") : fs::path(suite_flags.out);
    int status = kExitOk;
    for (const auto& path : configs) {
        std::cout << "== " << path.filename().string() << '\n';
        avsfe::RunConfig config;
        try {
            config = avsfe::load_config(path);
        } catch (const avsfe::ConfigError& err) {
            std::cerr << "config error: " << err.what() << '\n';
            status = std::max(status, kExitConfig);
            continue;
        }
        config.deep = suite_deep;
        CommonFlags flags = suite_flags;
        flags.out.clear();
        apply_common(config, flags, root / config.name);
        const int rc = run_one(config);
        if (rc != kExitOk) status = std::max(status, rc);
    }
    std::cout << (status == kExitOk ? "paper-suite: all studies completed\n" : "paper-suite: failures above\n");
    return status;
}
