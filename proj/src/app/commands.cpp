#include "nbf/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nbf/bounds.hpp"
#include "nbf/ctmc.hpp"
#include "nbf/ensemble.hpp"
#include "nbf/format.hpp"
#include "nbf/integrators.hpp"

namespace nbf::app {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFigurePoints = 10000;

fs::path out_dir(const RunConfig& cfg) {
    return fs::path(cfg.output.directory);
}

void emit(const fs::path& file, const std::string& contents, std::ostream& console) {
    write_file_atomic(file, contents);
    console << "wrote " << file.string() << '\n';
}

TheoremBounds bounds_for(const ValidatedModel& model, const SimulationConfig& sim) {
    const double alpha = sim.alpha.value_or(default_alpha(model, sim.theta));
    const double vartheta = sim.vartheta.value_or(default_vartheta(model));
    return compute_theorem_bounds(model, sim.theta, alpha, vartheta);
}

TrajectoryGrid single_path(const ValidatedModel& model, const SimulationConfig& sim, double horizon) {
    const NoiseStream stream(sim.seed, 0);
    const auto regimes = sample_path(model.generator(), model.initial_regime(), horizon, stream);
    return simulate(parse_scheme(sim.scheme), model, regimes, sim.dt, horizon, stream);
}

std::size_t figure_stride(const TrajectoryGrid& traj) {
    const std::size_t n = traj.size() - traj.origin;
    return std::max<std::size_t>(1, (n + kFigurePoints - 1) / kFigurePoints);
}

template <typename Row>
std::string figure_csv(const TrajectoryGrid& traj, const char* header, Row&& row) {
    std::ostringstream os;
    os << header << '\n';
    const std::size_t stride = figure_stride(traj);
    for (std::size_t k = traj.origin; k < traj.size(); ++k) {
        if ((k - traj.origin) % stride != 0 && k + 1 != traj.size()) {
            continue;
        }
        row(os, k);
    }
    return os.str();
}

int run_and_report(const RunConfig& cfg, std::ostream& console, std::size_t workers, bool strict) {
    const auto model = to_validated_model(cfg.model);
    auto ecfg = to_ensemble_config(cfg.simulation);
    ecfg.workers = workers;
    ecfg.alpha = cfg.simulation.alpha.value_or(default_alpha(model, ecfg.theta));
    const auto stats = run_ensemble(model, ecfg);
    const auto dir = out_dir(cfg);

    if (cfg.output.emit_stats) {
        std::ostringstream os;
        write_stats_csv(os, stats);
        emit(dir / "stats.csv", os.str(), console);
    }
    if (cfg.output.emit_paths) {
        std::ostringstream os;
        os << "path,x_T,lyap_T,runmin_T\n";
        for (std::size_t i = 0; i < stats.final_x.size(); ++i) {
            os << i << ',' << format_double(stats.final_x[i]) << ',' << format_double(stats.final_lyap[i]) << ','
               << format_double(stats.final_runmin[i]) << '\n';
        }
        emit(dir / "paths.csv", os.str(), console);
    }
    console << "paths = " << stats.n_paths << ", positivity violations = " << stats.positivity_violations
            << ", mean log X(T)/T = " << format_double(stats.lyap.back().mean) << '\n';

    if (!model.irreducible()) {
        console << "regime chain is reducible: bound verification skipped\n";
        return strict ? 2 : 0;
    }
    const auto bounds = bounds_for(model, cfg.simulation);
    const auto report = verify_bounds(stats, bounds, reference_cross_check(model));
    std::ostringstream text;
    write_report_text(text, report);
    std::ostringstream kv;
    write_report_kv(kv, report);
    console << text.str();
    emit(dir / "report.txt", text.str(), console);
    emit(dir / "report.kv", kv.str(), console);
    return strict && report.any_violated() ? 1 : 0;
}

}  // namespace

RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
    if (o.out) cfg.output.directory = *o.out;
    if (o.seed) cfg.simulation.seed = *o.seed;
    if (o.paths) {
        if (*o.paths < 1) {
            throw Error(ErrorCode::ConfigError, "--paths: must be >= 1");
        }
        cfg.simulation.n_paths = *o.paths;
    }
    if (o.dt) {
        if (!(*o.dt > 0.0) || *o.dt > cfg.simulation.t_max) {
            throw Error(ErrorCode::ConfigError, "--dt: must satisfy 0 < dt <= simulation.t_max");
        }
        cfg.simulation.dt = *o.dt;
    }
    if (o.scheme) {
        (void)parse_scheme(*o.scheme);
        cfg.simulation.scheme = *o.scheme;
    }
    return cfg;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& console) {
    const auto model = to_validated_model(cfg.model, /*require_irreducible=*/true);
    const auto bounds = bounds_for(model, cfg.simulation);
    std::ostringstream os;
    write_bounds_table(os, bounds, reference_cross_check(model));
    console << os.str();
    emit(out_dir(cfg) / "bounds.txt", os.str(), console);
    return 0;
}

int cmd_stationary(const RunConfig& cfg, std::ostream& console) {
    const auto model = to_validated_model(cfg.model, /*require_irreducible=*/true);
    const auto pi = stationary_distribution(model.generator());
    std::ostringstream csv;
    csv << "state,pi\n";
    console << "pi = (";
    for (std::size_t i = 0; i < pi.size(); ++i) {
        csv << i + 1 << ',' << format_double(pi[i]) << '\n';
        console << (i ? ", " : "") << format_double(pi[i]);
    }
    console << ")\nresidual max|pi Q| = " << format_double(stationary_residual(pi, model.generator())) << '\n';
    emit(out_dir(cfg) / "stationary.csv", csv.str(), console);
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& console) {
    const auto model = to_validated_model(cfg.model);
    const auto& sim = cfg.simulation;
    if (sim.dt > sim.t_max) {
        throw Error(ErrorCode::ConfigError, "simulation.dt: must not exceed t_max");
    }
    const NoiseStream stream(sim.seed, 0);
    const auto regimes = sample_path(model.generator(), model.initial_regime(), sim.t_max, stream);
    const auto traj = simulate(parse_scheme(sim.scheme), model, regimes, sim.dt, sim.t_max, stream);

    std::ostringstream path_csv;
    write_trajectory_csv(path_csv, traj);
    std::ostringstream regime_csv;
    write_regime_path_csv(regime_csv, regimes);
    const auto dir = out_dir(cfg);
    emit(dir / "trajectory.csv", path_csv.str(), console);
    emit(dir / "regime_path.csv", regime_csv.str(), console);
    console << "X(T) = " << format_double(traj.x.back()) << ", regime jumps = " << regimes.events.size() - 1
            << (traj.negative_excursion ? ", negative excursion detected" : "") << '\n';
    return 0;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& console, std::size_t workers) {
    return run_and_report(cfg, console, workers, /*strict=*/false);
}

int cmd_verify(const RunConfig& cfg, std::ostream& console, std::size_t workers) {
    return run_and_report(cfg, console, workers, /*strict=*/true);
}

int cmd_figures(const RunConfig& cfg, std::ostream& console) {
    const auto model = to_validated_model(cfg.model);
    const double horizon = cfg.figures && cfg.figures->t_max ? *cfg.figures->t_max : cfg.simulation.t_max;
    if (cfg.simulation.dt > horizon) {
        throw Error(ErrorCode::ConfigError, "simulation.dt: must not exceed the figure horizon");
    }
    const auto dir = out_dir(cfg);

    const auto traj = single_path(model, cfg.simulation, horizon);
    emit(dir / "figure_path.csv", figure_csv(traj, "t,x,regime", [&](std::ostream& os, std::size_t k) {
             os << format_double(traj.times[k]) << ',' << format_double(traj.x[k]) << ',' << traj.regime[k] + 1
                << '\n';
         }),
         console);
    emit(dir / "figure_lyapunov.csv", figure_csv(traj, "t,log_x_over_t", [&](std::ostream& os, std::size_t k) {
             if (traj.times[k] > 0.0) {
                 os << format_double(traj.times[k]) << ',' << format_double(std::log(traj.x[k]) / traj.times[k])
                    << '\n';
             }
         }),
         console);

    const bool has_decay = cfg.figures && cfg.figures->decay_model;
    const auto decay_model = has_decay ? to_validated_model(*cfg.figures->decay_model) : model;
    const auto decay = has_decay ? single_path(decay_model, cfg.simulation, horizon) : traj;
    emit(dir / "figure_decay.csv", figure_csv(decay, "t,x", [&](std::ostream& os, std::size_t k) {
             os << format_double(decay.times[k]) << ',' << format_double(decay.x[k]) << '\n';
         }),
         console);
    return 0;
}

}  // namespace nbf::app
