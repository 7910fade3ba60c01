#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sbmlab/config.hpp"
#include "sbmlab/runner.hpp"

namespace {

int cmd_run(const std::string& config_path, sbm::RunOptions opts,
            const std::vector<std::string>& fault_args) {
    for (const auto& f : fault_args) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "--fault expects KIND=FACTOR, got '%s'\n", f.c_str());
            return sbm::kExitUsage;
        }
        try {
            opts.faults[f.substr(0, eq)] = std::stod(f.substr(eq + 1));
        } catch (...) {
            std::fprintf(stderr, "--fault: bad factor in '%s'\n", f.c_str());
            return sbm::kExitUsage;
        }
    }

    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "cannot open config: %s\n", config_path.c_str());
        return sbm::kExitUsage;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    const sbm::ParseResult parsed = sbm::parse_config(buf.str());
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) {
            if (e.line > 0)
                std::fprintf(stderr, "%s:%d: %s\n", config_path.c_str(), e.line, e.message.c_str());
            else
                std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.message.c_str());
        }
        return sbm::kExitUsage;
    }
    return sbm::run_experiment(*parsed.config, opts);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sbmlab: stochastic branching / Anderson-model simulation lab"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment config and write CSV reports");
    std::string config_path, out_dir = "out";
    std::vector<std::string> faults;
    sbm::RunOptions opts;
    std::uint64_t seed = 0;
    long replicas = 0;
    int workers = 0;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory (default: out)");
    auto* seed_opt = run->add_option("--seed", seed, "override base_seed");
    auto* rep_opt = run->add_option("--replicas", replicas, "override replica count");
    auto* wrk_opt = run->add_option("--workers", workers, "worker thread count");
    run->add_flag("--deterministic", opts.deterministic,
                  "fixed reduction order (recorded; reductions are replica-ordered either way)");
    run->add_flag("--plot", opts.plot, "also write SVG line plots of checkpoint statistics");
    run->add_option("--fault", faults,
                    "inject a scheme fault, KIND=FACTOR with KIND in "
                    "{noise-scale, drift-scale, wrong-rho}");

    // list / describe
    auto* list = app.add_subcommand("list", "list experiment kinds");
    auto* describe = app.add_subcommand("describe", "describe one experiment kind");
    std::string kind;
    describe->add_option("kind", kind, "experiment kind")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "render SVG charts from a report CSV");
    std::string csv_path, plot_out = ".";
    plot->add_option("--csv", csv_path, "longtime report CSV")->required();
    plot->add_option("--out", plot_out, "output directory for SVG files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sbm::kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (*seed_opt) opts.seed_override = seed;
            if (*rep_opt) opts.replicas_override = replicas;
            if (*wrk_opt) opts.workers_override = workers;
            opts.out_dir = out_dir;
            return cmd_run(config_path, opts, faults);
        }
        if (list->parsed()) {
            for (const auto& k : sbm::list_experiments())
                std::printf("%-18s %s\n", k.c_str(), sbm::describe_experiment(k).c_str());
            return sbm::kExitPass;
        }
        if (describe->parsed()) {
            std::printf("%s\n", sbm::describe_experiment(kind).c_str());
            return sbm::kExitPass;
        }
        if (plot->parsed()) {
            for (const auto& p : sbm::plot_report_csv(csv_path, plot_out))
                std::printf("wrote %s\n", p.string().c_str());
            return sbm::kExitPass;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return sbm::kExitUsage;
    }
    return sbm::kExitUsage;
}
