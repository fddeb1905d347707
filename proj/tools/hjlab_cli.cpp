// hjlab: command-line front end for scenario runs, ensembles and the constant chain.

#include "hjlab/errors.hpp"
#include "hjlab/experiment.hpp"
#include "hjlab/oscillation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

unsigned env_workers() {
    const auto v = env("HJLAB_WORKERS");
    if (!v) return 1;
    try {
        const long n = std::stol(*v);
        if (n < 1) throw std::invalid_argument("");
        return static_cast<unsigned>(n);
    } catch (const std::exception&) {
        throw hjlab::ConfigError("HJLAB_WORKERS must be a positive integer, got '" + *v + "'");
    }
}

int run_config(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
               std::optional<int> resolution, std::size_t count, bool ensemble) {
    auto cfg = hjlab::parse_config_file(path);
    hjlab::apply_overrides(cfg, seed, resolution);
    hjlab::RunOptions opts;
    if (!out.empty())
        opts.out_dir = out;
    else if (auto d = env("HJLAB_OUT_DIR"))
        opts.out_dir = *d;
    opts.count = count;
    opts.ensemble = ensemble;
    opts.workers = env_workers();
    const auto rep = hjlab::execute(cfg, opts);
    const auto& summary = rep.report["summary"];
    std::cout << "status: " << rep.status << "\n"
              << "members: " << summary["members"] << "  counts: " << summary["counts"].dump() << "\n"
              << "report: " << (rep.run_dir / "report.json").string() << "\n";
    for (const auto& e : summary["errors"]) std::cerr << "member " << e["member"] << ": " << e["message"].get<std::string>() << "\n";
    return hjlab::exit_code(rep.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi regularity lab"};
    app.require_subcommand(1);

    std::string config, out;
    std::uint64_t seed = 0;
    int resolution = 0;
    std::size_t count = 1;

    auto* run = app.add_subcommand("run", "run one scenario config");
    run->add_option("--config", config, "YAML config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output root (default: config output.dir or HJLAB_OUT_DIR)");
    auto* run_seed = run->add_option("--seed", seed, "seed override");
    auto* run_res = run->add_option("--resolution", resolution, "cells per axis override")->check(CLI::PositiveNumber);

    auto* ens = app.add_subcommand("ensemble", "run a seeded ensemble of a scenario config");
    ens->add_option("--config", config, "YAML config")->required()->check(CLI::ExistingFile);
    ens->add_option("--count", count, "members")->required()->check(CLI::PositiveNumber);
    auto* ens_seed = ens->add_option("--seed", seed, "ensemble seed")->required();
    ens->add_option("--out", out, "output root");

    int N = 2;
    double p = 1.5, lambda = 1.0, alpha = 1.0;
    auto* chain = app.add_subcommand("chain", "print the constant chain as JSON");
    chain->add_option("--N", N, "dimension")->required();
    chain->add_option("--p", p, "exponent")->required();
    chain->add_option("--lambda", lambda, "coercivity constant")->required();
    chain->add_option("--alpha", alpha, "De Giorgi measure threshold")->required();

    auto* list = app.add_subcommand("list-scenarios", "list built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run)
            return run_config(config, out, *run_seed ? std::optional<std::uint64_t>(seed) : std::nullopt,
                              *run_res ? std::optional<int>(resolution) : std::nullopt, 1, false);
        if (*ens) return run_config(config, out, *ens_seed ? std::optional<std::uint64_t>(seed) : std::nullopt,
                                    std::nullopt, count, true);
        if (*chain) {
            const nlohmann::json c = hjlab::build_constant_chain(N, p, lambda, alpha);
            std::cout << c.dump(2) << "\n";
            return 0;
        }
        if (*list) {
            for (const auto& s : hjlab::scenarios()) std::cout << s.name << "\t" << s.description << "\n";
            return 0;
        }
    } catch (const hjlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hjlab::OutOfTheoremScope& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hjlab::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
