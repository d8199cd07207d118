#include "nbf/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nbf/format.hpp"

namespace nbf {

std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::VariationOfConstants ? "voc" : "em";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "voc") {
        return Scheme::VariationOfConstants;
    }
    if (name == "em") {
        return Scheme::EulerMaruyama;
    }
    throw Error(ErrorCode::ConfigError, "scheme must be \"voc\" or \"em\", got \"" + std::string(name) + "\"");
}

namespace {

double interpolate(const TrajectoryGrid& traj, std::size_t lo, double t) {
    if (traj.times[lo] == t) {
        return traj.x[lo];
    }
    const double t0 = traj.times[lo];
    const double t1 = traj.times[lo + 1];
    const double w = (t - t0) / (t1 - t0);
    return traj.x[lo] + w * (traj.x[lo + 1] - traj.x[lo]);
}

/// Amortised O(1) delayed lookup while the query time moves forward; falls
/// back to binary search when it moves back (a regime with a longer delay).
class DelayCursor {
public:
    explicit DelayCursor(const TrajectoryGrid& traj) : traj_(traj) {}

    double operator()(double t) {
        const auto& times = traj_.times;
        const std::size_t last = times.size() - 1;
        if (t >= times[last]) {
            return traj_.x[last];
        }
        if (times[pos_] > t) {
            pos_ = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
        } else {
            while (times[pos_ + 1] <= t) {
                ++pos_;
            }
        }
        return interpolate(traj_, pos_, t);
    }

private:
    const TrajectoryGrid& traj_;
    std::size_t pos_ = 0;
};

struct VocStep {
    static double apply(double x, double birth, const RegimeParams& r, double h, double db) {
        return std::exp(-(r.delta + 0.5 * r.sigma * r.sigma) * h + r.sigma * db) * (x + h * birth);
    }
};

struct EmStep {
    static double apply(double x, double birth, const RegimeParams& r, double h, double db) {
        return x + (-r.delta * x + birth) * h + r.sigma * x * db;
    }
};

void seed_history(const ValidatedModel& model, double dt, TrajectoryGrid& traj) {
    const double tau_max = model.tau_max();
    const auto& phi = model.history();
    std::vector<double> ts;
    for (const auto& s : phi.samples()) {
        if (s.time >= -tau_max && s.time < 0.0) {
            ts.push_back(s.time);
        }
    }
    if (tau_max > 0.0) {
        ts.push_back(-tau_max);
        const auto k_min = static_cast<long long>(std::ceil(-tau_max / dt));
        for (long long k = k_min; k < 0; ++k) {
            ts.push_back(static_cast<double>(k) * dt);
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    const auto r0 = static_cast<std::uint32_t>(model.initial_regime());
    for (double t : ts) {
        traj.times.push_back(t);
        traj.x.push_back(phi(t));
        traj.regime.push_back(r0);
    }
    traj.origin = traj.times.size();
    traj.times.push_back(0.0);
    traj.x.push_back(phi(0.0));
    traj.regime.push_back(r0);
}

template <typename Step>
TrajectoryGrid integrate(const ValidatedModel& model, const RegimePath& path, double dt, double horizon,
                         const NoiseStream& stream, const IntegrationOptions& options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidParameter, "dt must be positive");
    }
    if (!(horizon >= dt)) {
        throw Error(ErrorCode::InvalidParameter, "horizon must be at least dt");
    }
    if (path.horizon < horizon || path.events.empty()) {
        throw Error(ErrorCode::OutOfRange, "regime path does not cover [0, horizon]");
    }
    if (path.events.front().state != model.initial_regime()) {
        throw Error(ErrorCode::PreconditionViolation, "regime path does not start in the model's initial regime");
    }
    const double base_dt = options.base_dt > 0.0 ? options.base_dt : dt;
    const int level = dyadic_level(base_dt, dt);
    if (level < 0) {
        throw Error(ErrorCode::NonDyadicRefinement, "dt is not base_dt / 2^k");
    }
    BrownianIncrements brownian(stream, base_dt, static_cast<unsigned>(level));

    const auto cells = static_cast<std::uint64_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));

    TrajectoryGrid traj;
    traj.noise.seed = stream.seed();
    traj.noise.substream = stream.substream();
    const std::size_t capacity =
        static_cast<std::size_t>(model.tau_max() / dt) + 2 + cells + 2 * path.events.size();
    traj.times.reserve(capacity);
    traj.x.reserve(capacity);
    traj.regime.reserve(capacity);
    traj.noise.increments.reserve(cells + 2 * path.events.size());
    seed_history(model, dt, traj);

    DelayCursor delayed(traj);
    const auto& events = path.events;
    std::size_t next_event = 1;
    std::size_t state = model.initial_regime();
    double x = traj.x.back();

    std::vector<double> split_times;
    std::vector<double> fractions;
    std::vector<double> pieces;

    for (std::uint64_t k = 0; k < cells; ++k) {
        const double start = static_cast<double>(k) * dt;
        const bool last = k + 1 == cells;
        const double end = last ? horizon : static_cast<double>(k + 1) * dt;
        const double w = brownian.cell(k);

        split_times.clear();
        for (std::size_t e = next_event; e < events.size() && events[e].time < end; ++e) {
            if (events[e].time > start) {
                split_times.push_back(events[e].time);
            }
        }
        const bool truncated = last && end < start + dt * (1.0 - 1e-12);
        if (split_times.empty() && !truncated) {
            pieces.assign(1, w);
        } else {
            fractions.clear();
            for (double t : split_times) {
                fractions.push_back((t - start) / dt);
            }
            if (truncated) {
                fractions.push_back((end - start) / dt);
            }
            brownian.split(k, w, dt, fractions, pieces);
        }

        double s = start;
        for (std::size_t piece = 0; piece <= split_times.size(); ++piece) {
            const double b = piece < split_times.size() ? split_times[piece] : end;
            const double h = b - s;
            const double db = pieces[piece];
            const auto& r = model.regime(state);
            const double birth = model.birth(delayed(s - r.tau), state);
            x = Step::apply(x, birth, r, h, db);
            traj.noise.increments.push_back(db);

            while (next_event < events.size() && events[next_event].time <= b) {
                state = events[next_event].state;
                ++next_event;
            }
            traj.times.push_back(b);
            traj.x.push_back(x);
            traj.regime.push_back(static_cast<std::uint32_t>(state));
            if (!(x > 0.0)) {
                traj.negative_excursion = true;
            }
            s = b;
        }
    }
    return traj;
}

}  // namespace

double history_lookup(const TrajectoryGrid& traj, double t) {
    if (traj.times.empty() || !(t >= traj.times.front()) || !(t <= traj.times.back())) {
        throw Error(ErrorCode::OutOfRange, "lookup time " + format_double(t) + " outside the computed grid");
    }
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    const auto lo = static_cast<std::size_t>(it - traj.times.begin()) - 1;
    if (lo + 1 == traj.times.size()) {
        return traj.x[lo];
    }
    return interpolate(traj, lo, t);
}

TrajectoryGrid simulate_voc(const ValidatedModel& model, const RegimePath& path, double dt, double horizon,
                            const NoiseStream& stream, const IntegrationOptions& options) {
    return integrate<VocStep>(model, path, dt, horizon, stream, options);
}

TrajectoryGrid simulate_em(const ValidatedModel& model, const RegimePath& path, double dt, double horizon,
                           const NoiseStream& stream, const IntegrationOptions& options) {
    return integrate<EmStep>(model, path, dt, horizon, stream, options);
}

TrajectoryGrid simulate(Scheme scheme, const ValidatedModel& model, const RegimePath& path, double dt,
                        double horizon, const NoiseStream& stream, const IntegrationOptions& options) {
    return scheme == Scheme::VariationOfConstants ? simulate_voc(model, path, dt, horizon, stream, options)
                                                  : simulate_em(model, path, dt, horizon, stream, options);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryGrid& traj, std::string_view time_header,
                          std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    out << time_header << ",x,regime\n";
    const std::size_t n = traj.times.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (k % stride != 0 && k + 1 != n) {
            continue;
        }
        out << format_double(traj.times[k]) << ',' << format_double(traj.x[k]) << ',' << traj.regime[k] + 1 << '\n';
    }
}

}  // namespace nbf
