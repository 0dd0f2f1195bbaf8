// Command-line driver: one experiment per invocation.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wkl/experiments.hpp"
#include "wkl/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Wave kinetic equations: structure checks, limits and simulations"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    for (const auto& name : wkl::known_commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
        sub->add_option("--seed", seed, "seed for randomized checks");
        sub->add_option("--set", overrides, "override a config key, e.g. --set grid.n=17");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommands().front();

    try {
        std::vector<std::string> sets = overrides;
        if (sub->count("--seed")) sets.push_back("seed=" + std::to_string(seed));
        wkl::ExperimentConfig cfg = wkl::load_config(config_path, sets, command);
        wkl::set_thread_count(threads);
        const auto outcome = wkl::run_experiment(cfg, out_dir);
        for (const auto& c : outcome.checks)
            std::printf("%-28s %s  value=%.6g %s %.3g\n", c.name.c_str(), c.pass ? "ok  " : "FAIL", c.value,
                        c.relation.c_str(), c.tolerance);
        return wkl::exit_code(outcome);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
