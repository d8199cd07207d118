#include <iostream>

#include <CLI11.hpp>

#include "nbf/app/commands.hpp"
#include "nbf/app/config.hpp"
#include "nbf/error.hpp"

namespace {

struct Flags {
    std::string config;
    nbf::app::Overrides overrides;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Flags& flags) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.overrides.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", flags.overrides.seed, "master seed (overrides simulation.seed)");
    sub->add_option("--paths", flags.overrides.paths, "ensemble size (overrides simulation.n_paths)");
    sub->add_option("--dt", flags.overrides.dt, "step size (overrides simulation.dt)");
    sub->add_option("--scheme", flags.overrides.scheme, "voc | em (overrides simulation.scheme)")
        ->check(CLI::IsMember({"voc", "em"}));
    sub->add_option("--workers", flags.overrides.workers, "worker threads, 0 = all cores; results do not depend on it");
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regime-switching stochastic blowflies simulator and bound verifier"};
    app.require_subcommand(1);
    Flags flags;
    auto* bounds = add_command(app, "bounds", "print the analytic bounds table", flags);
    auto* stationary = add_command(app, "stationary", "stationary distribution of the regime chain", flags);
    auto* simulate = add_command(app, "simulate", "one trajectory as CSV", flags);
    auto* ensemble = add_command(app, "ensemble", "Monte Carlo statistics and bound report", flags);
    auto* figures = add_command(app, "figures", "figure-data CSVs", flags);
    auto* verify = add_command(app, "verify", "ensemble + bound report; exit 1 on a violated bound", flags);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = nbf::app::apply_overrides(nbf::app::load_config(flags.config), flags.overrides);
        const std::size_t workers = flags.overrides.workers;
        if (bounds->parsed()) return nbf::app::cmd_bounds(cfg, std::cout);
        if (stationary->parsed()) return nbf::app::cmd_stationary(cfg, std::cout);
        if (simulate->parsed()) return nbf::app::cmd_simulate(cfg, std::cout);
        if (ensemble->parsed()) return nbf::app::cmd_ensemble(cfg, std::cout, workers);
        if (figures->parsed()) return nbf::app::cmd_figures(cfg, std::cout);
        if (verify->parsed()) return nbf::app::cmd_verify(cfg, std::cout, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
