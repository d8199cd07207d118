#include "nbf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "nbf/ctmc.hpp"
#include "nbf/format.hpp"
#include "nbf/parallel.hpp"

namespace nbf {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pow_theta(double x, double theta) {
    if (theta == 1.0) {
        return x;
    }
    if (theta == 2.0) {
        return x * x;
    }
    return std::pow(x, theta);
}

std::uint64_t cell_count(double horizon, double dt) {
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
}

/// Output grid: every stride-th multiple of dt, then T itself.
std::vector<double> output_times(const EnsembleConfig& cfg) {
    const std::uint64_t cells = cell_count(cfg.horizon, cfg.dt);
    const std::uint64_t max_points = std::max<std::size_t>(1, cfg.max_output_points);
    const std::uint64_t stride = (cells + max_points - 1) / max_points;
    std::vector<double> t;
    for (std::uint64_t k = stride; k < cells; k += stride) {
        t.push_back(static_cast<double>(k) * cfg.dt);
    }
    t.push_back(cfg.horizon);
    return t;
}

struct PathResult {
    std::vector<double> x_theta;
    std::vector<double> x2;
    std::vector<double> integral;
    std::vector<double> lyap;
    std::vector<double> runmin;
    double final_x = 0.0;
    double min_x = 0.0;
    bool negative = false;
};

PathResult summarise_path(const TrajectoryGrid& traj, const std::vector<double>& t_out, double theta,
                          double tail_window) {
    PathResult r;
    const std::size_t n_out = t_out.size();
    r.x_theta.resize(n_out);
    r.x2.resize(n_out);
    r.integral.resize(n_out);
    r.lyap.resize(n_out);
    r.runmin.resize(n_out);
    r.negative = traj.negative_excursion;

    const auto& times = traj.times;
    const auto& x = traj.x;
    std::size_t g = traj.origin;
    double integral = 0.0;
    double prev_theta = pow_theta(x[g], theta);
    double min_x = x[g];
    std::deque<std::size_t> window{g};

    for (std::size_t j = 0; j < n_out; ++j) {
        const double tj = t_out[j];
        while (g + 1 < times.size() && times[g] < tj) {
            ++g;
            const double cur = pow_theta(x[g], theta);
            integral += 0.5 * (prev_theta + cur) * (times[g] - times[g - 1]);
            prev_theta = cur;
            min_x = std::min(min_x, x[g]);
            while (!window.empty() && x[window.back()] >= x[g]) {
                window.pop_back();
            }
            window.push_back(g);
        }
        const double lo = tj * (1.0 - tail_window);
        while (window.size() > 1 && times[window.front()] < lo) {
            window.pop_front();
        }
        r.x_theta[j] = prev_theta;
        r.x2[j] = x[g] * x[g];
        r.integral[j] = integral;
        r.lyap[j] = x[g] > 0.0 ? std::log(x[g]) / tj : kNaN;
        r.runmin[j] = x[window.front()];
    }
    r.final_x = x[g];
    r.min_x = min_x;
    return r;
}

struct Accumulator {
    std::size_t count = 0;
    std::vector<double> mean_theta, m2_theta, sum_x2, sum_integral, sum_lyap, sum_runmin;
    std::vector<double> lyap_min, lyap_max, runmin_min, runmin_max;

    explicit Accumulator(std::size_t n)
        : mean_theta(n, 0.0), m2_theta(n, 0.0), sum_x2(n, 0.0), sum_integral(n, 0.0), sum_lyap(n, 0.0),
          sum_runmin(n, 0.0), lyap_min(n, std::numeric_limits<double>::infinity()),
          lyap_max(n, -std::numeric_limits<double>::infinity()),
          runmin_min(n, std::numeric_limits<double>::infinity()),
          runmin_max(n, -std::numeric_limits<double>::infinity()) {}

    static void fold_min(double& acc, double v) { acc = (std::isnan(v) || std::isnan(acc)) ? kNaN : std::min(acc, v); }
    static void fold_max(double& acc, double v) { acc = (std::isnan(v) || std::isnan(acc)) ? kNaN : std::max(acc, v); }

    void add(const PathResult& r) {
        ++count;
        const auto k = static_cast<double>(count);
        for (std::size_t j = 0; j < mean_theta.size(); ++j) {
            const double delta = r.x_theta[j] - mean_theta[j];
            mean_theta[j] += delta / k;
            m2_theta[j] += delta * (r.x_theta[j] - mean_theta[j]);
            sum_x2[j] += r.x2[j];
            sum_integral[j] += r.integral[j];
            sum_lyap[j] += r.lyap[j];
            sum_runmin[j] += r.runmin[j];
            fold_min(lyap_min[j], r.lyap[j]);
            fold_max(lyap_max[j], r.lyap[j]);
            fold_min(runmin_min[j], r.runmin[j]);
            fold_max(runmin_max[j], r.runmin[j]);
        }
    }
};

double sample_half_width(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double delta = v[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v[i] - mean);
    }
    const double n = static_cast<double>(v.size());
    return kZ95 * std::sqrt(m2 / (n - 1.0) / n);
}

double slack_for(double bound) {
    return kVerdictSlack * std::max(std::abs(bound), 1.0);
}

BoundCheck make_check(std::string name, std::string statistic, BoundSide side, double bound, double empirical,
                      double half_width) {
    BoundCheck c;
    c.name = std::move(name);
    c.statistic = std::move(statistic);
    c.side = side;
    c.bound = bound;
    c.empirical = empirical;
    c.half_width = half_width;
    const double slack = slack_for(bound);
    if (side == BoundSide::Upper) {
        c.margin = bound - empirical;
        c.verdict = (empirical - half_width > bound + slack) ? Verdict::Violated : Verdict::Consistent;
    } else {
        c.margin = empirical - bound;
        c.verdict = (empirical + half_width < bound - slack) ? Verdict::Violated : Verdict::Consistent;
    }
    if (std::isnan(empirical)) {
        c.verdict = Verdict::NotApplicable;
        c.note = "empirical statistic undefined (non-positive values)";
    }
    return c;
}

BoundCheck not_applicable(std::string name, std::string statistic, std::string note) {
    BoundCheck c;
    c.name = std::move(name);
    c.statistic = std::move(statistic);
    c.bound = kNaN;
    c.empirical = kNaN;
    c.margin = kNaN;
    c.verdict = Verdict::NotApplicable;
    c.note = std::move(note);
    return c;
}

std::size_t tail_begin(const EnsembleStats& s) {
    const double lo = s.horizon * (1.0 - s.tail_window);
    return static_cast<std::size_t>(std::lower_bound(s.t.begin(), s.t.end(), lo) - s.t.begin());
}

}  // namespace

void validate_config(const EnsembleConfig& cfg) {
    if (cfg.n_paths < 1) {
        throw Error(ErrorCode::InvalidParameter, "n_paths must be >= 1");
    }
    if (!(cfg.dt > 0.0) || !(cfg.dt <= cfg.horizon) || !std::isfinite(cfg.horizon)) {
        throw Error(ErrorCode::InvalidParameter, "dt must satisfy 0 < dt <= t_max");
    }
    if (!(cfg.tail_window > 0.0 && cfg.tail_window <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "tail_window must lie in (0, 1]");
    }
}

EnsembleStats run_ensemble(const ValidatedModel& model, const EnsembleConfig& cfg) {
    validate_config(cfg);
    EnsembleStats s;
    s.theta = cfg.theta;
    s.alpha = cfg.alpha.value_or(default_alpha(model, cfg.theta));
    s.horizon = cfg.horizon;
    s.dt = cfg.dt;
    s.tail_window = cfg.tail_window;
    s.n_paths = cfg.n_paths;
    s.scheme = cfg.scheme;
    s.t = output_times(cfg);

    const std::size_t n_out = s.t.size();
    Accumulator acc(n_out);
    s.final_x.reserve(cfg.n_paths);
    s.final_lyap.reserve(cfg.n_paths);
    s.final_runmin.reserve(cfg.n_paths);
    s.min_x = std::numeric_limits<double>::infinity();

    ordered_parallel_for(
        cfg.n_paths, resolve_workers(cfg.workers),
        [&](std::size_t i) {
            const NoiseStream stream(cfg.seed, i);
            const auto regimes = sample_path(model.generator(), model.initial_regime(), cfg.horizon, stream);
            const auto traj = simulate(cfg.scheme, model, regimes, cfg.dt, cfg.horizon, stream);
            return summarise_path(traj, s.t, cfg.theta, cfg.tail_window);
        },
        [&](std::size_t, PathResult&& r) {
            acc.add(r);
            s.final_x.push_back(r.final_x);
            s.final_lyap.push_back(r.lyap.back());
            s.final_runmin.push_back(r.runmin.back());
            s.min_x = std::min(s.min_x, r.min_x);
            if (r.negative) {
                ++s.positivity_violations;
            }
        });

    const double n = static_cast<double>(cfg.n_paths);
    s.mean_x_theta = acc.mean_theta;
    s.ci_half.resize(n_out);
    s.mean_x2.resize(n_out);
    s.time_avg.resize(n_out);
    s.lyap.resize(n_out);
    s.running_min.resize(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
        s.ci_half[j] = cfg.n_paths > 1 ? kZ95 * std::sqrt(acc.m2_theta[j] / (n - 1.0) / n) : 0.0;
        s.mean_x2[j] = acc.sum_x2[j] / n;
        s.time_avg[j] = acc.sum_integral[j] / n / s.t[j];
        s.lyap[j] = {acc.lyap_min[j], acc.sum_lyap[j] / n, acc.lyap_max[j]};
        s.running_min[j] = {acc.runmin_min[j], acc.sum_runmin[j] / n, acc.runmin_max[j]};
    }
    return s;
}

void write_stats_csv(std::ostream& out, const EnsembleStats& s) {
    out << "t,mean_x_theta,ci_half,time_avg,lyap_min,lyap_mean,lyap_max,runmin_mean\n";
    for (std::size_t j = 0; j < s.t.size(); ++j) {
        out << format_double(s.t[j]) << ',' << format_double(s.mean_x_theta[j]) << ','
            << format_double(s.ci_half[j]) << ',' << format_double(s.time_avg[j]) << ','
            << format_double(s.lyap[j].min) << ',' << format_double(s.lyap[j].mean) << ','
            << format_double(s.lyap[j].max) << ',' << format_double(s.running_min[j].mean) << '\n';
    }
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Violated: return "violated";
        case Verdict::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

const BoundCheck& BoundReport::check(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return c;
        }
    }
    throw Error(ErrorCode::OutOfRange, "no bound check named " + std::string(name));
}

bool BoundReport::any_violated() const {
    return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.verdict == Verdict::Violated; });
}

BoundReport verify_bounds(const EnsembleStats& stats, const TheoremBounds& bounds,
                          std::vector<CrossCheckRow> cross_check) {
    if (stats.theta != bounds.theta || stats.alpha != bounds.alpha) {
        throw Error(ErrorCode::MismatchedConfig, "stats (theta=" + format_double(stats.theta) +
                                                     ", alpha=" + format_double(stats.alpha) +
                                                     ") and bounds (theta=" + format_double(bounds.theta) +
                                                     ", alpha=" + format_double(bounds.alpha) + ") differ");
    }
    if (stats.t.empty()) {
        throw Error(ErrorCode::PreconditionViolation, "empty ensemble statistics");
    }
    BoundReport report;
    report.cross_check = std::move(cross_check);
    auto& out = report.checks;

    const std::size_t tail = std::min(tail_begin(stats), stats.t.size() - 1);
    const std::size_t last = stats.t.size() - 1;
    const double lyap_mean = stats.lyap[last].mean;
    const double lyap_hw = sample_half_width(stats.final_lyap);

    {
        BoundCheck c;
        c.name = "positivity";
        c.statistic = "paths with some X <= 0";
        c.bound = 0.0;
        c.empirical = static_cast<double>(stats.positivity_violations);
        c.margin = -c.empirical;
        if (stats.scheme == Scheme::VariationOfConstants) {
            c.verdict = (stats.positivity_violations == 0 && stats.min_x > 0.0) ? Verdict::Consistent
                                                                                 : Verdict::Violated;
        } else {
            c.verdict = Verdict::NotApplicable;
            c.note = "Euler-Maruyama does not preserve positivity; excursions are scheme artefacts";
        }
        out.push_back(c);
    }

    {
        std::size_t arg = tail;
        for (std::size_t j = tail; j <= last; ++j) {
            if (stats.mean_x_theta[j] > stats.mean_x_theta[arg]) {
                arg = j;
            }
        }
        out.push_back(make_check("moment_minmax", "max over tail of E[X^theta]", BoundSide::Upper,
                                 bounds.moment_bound_Mhat, stats.mean_x_theta[arg], stats.ci_half[arg]));
    }
    out.push_back(make_check("time_average_minmax", "(1/T) int_0^T E[X^theta]", BoundSide::Upper,
                             bounds.time_avg_bound_What_over_alpha, stats.time_avg[last], 0.0));
    out.push_back(make_check("lyapunov_lower_minmax", "mean log X(T)/T", BoundSide::Lower, bounds.lyap_lower_minmax,
                             lyap_mean, lyap_hw));
    out.push_back(make_check("lyapunov_upper_minmax", "mean log X(T)/T", BoundSide::Upper, bounds.lyap_upper_minmax,
                             lyap_mean, lyap_hw));
    out.push_back(make_check("time_average_stationary", "(1/T) int_0^T E[X^theta]", BoundSide::Upper,
                             bounds.time_avg_bound_pi, stats.time_avg[last], 0.0));
    out.push_back(make_check("lyapunov_lower_stationary", "mean log X(T)/T", BoundSide::Lower, bounds.lyap_lower,
                             lyap_mean, lyap_hw));
    out.push_back(make_check("lyapunov_upper_stationary", "mean log X(T)/T", BoundSide::Upper, bounds.lyap_upper,
                             lyap_mean, lyap_hw));
    out.push_back(make_check("liminf_nstar", "mean tail running minimum at T", BoundSide::Upper, bounds.nstar,
                             stats.running_min[last].mean, sample_half_width(stats.final_runmin)));

    if (bounds.all_birth_zero) {
        out.push_back(make_check("extinction", "mean log X(T)/T", BoundSide::Upper, -bounds.extinction_rate,
                                 lyap_mean, lyap_hw));
    } else if (bounds.all_delay_zero) {
        auto c = make_check("extinction", "mean log X(T)/T", BoundSide::Upper, -bounds.lambda, lyap_mean, lyap_hw);
        if (bounds.lambda_borderline) {
            c.note = "lambda = 0: limsup X <= 1 is reported, not checked";
        }
        out.push_back(c);
    } else {
        out.push_back(not_applicable("extinction", "mean log X(T)/T", "needs every p_i = 0 or every tau_i = 0"));
    }

    if (bounds.kappa) {
        const double kappa = *bounds.kappa;
        // least-squares slope of log E[X^2(t)] over the tail window
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, cnt = 0.0;
        for (std::size_t j = tail; j <= last; ++j) {
            if (stats.mean_x2[j] > 0.0) {
                const double y = std::log(stats.mean_x2[j]);
                st += stats.t[j];
                sy += y;
                stt += stats.t[j] * stats.t[j];
                sty += stats.t[j] * y;
                cnt += 1.0;
            }
        }
        const double denom = cnt * stt - st * st;
        const double slope = (cnt >= 2.0 && denom > 0.0) ? (cnt * sty - st * sy) / denom : kNaN;
        out.push_back(
            make_check("decay_second_moment", "slope of log E[X^2] over tail", BoundSide::Upper, -kappa, slope, 0.0));

        std::vector<double> sorted = stats.final_lyap;
        std::sort(sorted.begin(), sorted.end());
        const auto q = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
        out.push_back(make_check("decay_pathwise", "95th percentile of per-path log X(T)/T", BoundSide::Upper,
                                 -kappa / 2.0, sorted[std::min(q, sorted.size() - 1)], 0.0));
    } else {
        out.push_back(not_applicable("decay_second_moment", "slope of log E[X^2] over tail", bounds.kappa_note));
        out.push_back(not_applicable("decay_pathwise", "95th percentile of per-path log X(T)/T", bounds.kappa_note));
    }
    return report;
}

void write_report_text(std::ostream& out, const BoundReport& report) {
    out << std::left << std::setw(28) << "check" << std::setw(8) << "side" << std::setw(24) << "bound"
        << std::setw(24) << "empirical" << std::setw(24) << "half_width" << std::setw(24) << "margin"
        << "verdict\n";
    for (const auto& c : report.checks) {
        out << std::setw(28) << c.name << std::setw(8) << (c.side == BoundSide::Upper ? "<=" : ">=")
            << std::setw(24) << format_double(c.bound) << std::setw(24) << format_double(c.empirical)
            << std::setw(24) << format_double(c.half_width) << std::setw(24) << format_double(c.margin)
            << to_string(c.verdict);
        if (!c.note.empty()) {
            out << "  (" << c.note << ")";
        }
        out << '\n';
    }
    if (!report.cross_check.empty()) {
        out << "\nreference cross-check\n";
        out << std::setw(28) << "quantity" << std::setw(24) << "reference" << std::setw(24) << "computed"
            << "status\n";
        for (const auto& r : report.cross_check) {
            out << std::setw(28) << r.quantity << std::setw(24) << format_double(r.reference) << std::setw(24)
                << format_double(r.computed) << (r.agrees ? "agrees" : "DISAGREES") << '\n';
        }
    }
    out << std::right;
}

void write_report_kv(std::ostream& out, const BoundReport& report) {
    for (const auto& c : report.checks) {
        const std::string p = "check." + c.name + ".";
        out << p << "side=" << (c.side == BoundSide::Upper ? "upper" : "lower") << '\n';
        out << p << "bound=" << format_double(c.bound) << '\n';
        out << p << "empirical=" << format_double(c.empirical) << '\n';
        out << p << "half_width=" << format_double(c.half_width) << '\n';
        out << p << "margin=" << format_double(c.margin) << '\n';
        out << p << "verdict=" << to_string(c.verdict) << '\n';
    }
    for (const auto& r : report.cross_check) {
        std::string key = r.quantity.substr(0, r.quantity.find(' '));
        std::replace(key.begin(), key.end(), '*', 's');
        out << "reference." << key << ".reference=" << format_double(r.reference) << '\n';
        out << "reference." << key << ".computed=" << format_double(r.computed) << '\n';
        out << "reference." << key << ".agrees=" << (r.agrees ? "true" : "false") << '\n';
    }
}

void write_bounds_table(std::ostream& out, const TheoremBounds& b, const std::vector<CrossCheckRow>& cross_check) {
    const auto& dc = b.constants;
    out << "theta = " << format_double(b.theta) << ", alpha = " << format_double(b.alpha)
        << ", vartheta = " << format_double(b.vartheta) << "\n\n";
    out << std::left << std::setw(8) << "regime";
    for (const char* h : {"pi", "beta", "gamma", "rho", "d", "mu", "M", "W", "C"}) {
        out << std::setw(22) << h;
    }
    out << '\n';
    for (std::size_t i = 0; i < dc.d.size(); ++i) {
        out << std::setw(8) << i + 1;
        for (double v : {b.pi[i], dc.beta[i], dc.gamma[i], dc.rho[i], dc.d[i], dc.mu[i], dc.bigM[i], dc.bigW[i],
                         dc.bigC[i]}) {
            out << std::setw(22) << format_double(v);
        }
        out << '\n';
    }
    out << '\n';
    auto line = [&](const char* name, double v) { out << std::setw(44) << name << format_double(v) << '\n'; };
    line("moment bound M-hat", b.moment_bound_Mhat);
    line("time-average bound W-hat/alpha", b.time_avg_bound_What_over_alpha);
    line("time-average bound sum(pi W)/alpha", b.time_avg_bound_pi);
    line("lyapunov lower -d-check", b.lyap_lower_minmax);
    line("lyapunov upper C-check/2", b.lyap_upper_minmax);
    line("lyapunov lower -sum(pi d)", b.lyap_lower);
    line("lyapunov upper sum(pi C)/2", b.lyap_upper);
    line("N*", b.nstar);
    line("lambda = sum pi (d - p)", b.lambda);
    line("mu-hat", b.mu_hat);
    if (b.kappa) {
        line("kappa", *b.kappa);
    } else {
        out << std::setw(44) << "kappa" << "n/a (" << b.kappa_note << ")\n";
    }
    if (b.lambda_borderline) {
        out << "lambda = 0 with zero delays: limsup X(t) <= 1 (reported, not checked)\n";
    }
    if (!cross_check.empty()) {
        out << "\nreference cross-check\n";
        out << std::setw(28) << "quantity" << std::setw(24) << "reference" << std::setw(24) << "computed"
            << "status\n";
        for (const auto& r : cross_check) {
            out << std::setw(28) << r.quantity << std::setw(24) << format_double(r.reference) << std::setw(24)
                << format_double(r.computed) << (r.agrees ? "agrees" : "DISAGREES") << '\n';
        }
    }
    out << std::right;
}

std::vector<ConvergenceRow> convergence_study(const ValidatedModel& model, const EnsembleConfig& cfg,
                                              const std::vector<double>& dts) {
    if (dts.empty()) {
        throw Error(ErrorCode::NonDyadicRefinement, "no step sizes given");
    }
    for (std::size_t k = 0; k < dts.size(); ++k) {
        if (k > 0 && !(dts[k] < dts[k - 1])) {
            throw Error(ErrorCode::NonDyadicRefinement, "step sizes must be strictly decreasing");
        }
        if (dyadic_level(dts.front(), dts[k]) < 0) {
            throw Error(ErrorCode::NonDyadicRefinement,
                        format_double(dts[k]) + " is not " + format_double(dts.front()) + " / 2^k");
        }
    }
    if (!(dts.front() <= cfg.horizon)) {
        throw Error(ErrorCode::InvalidParameter, "coarsest dt exceeds the horizon");
    }
    std::vector<ConvergenceRow> rows;
    const IntegrationOptions options{.base_dt = dts.front()};
    for (double dt : dts) {
        double total = 0.0;
        ordered_parallel_for(
            cfg.n_paths, resolve_workers(cfg.workers),
            [&](std::size_t i) {
                const NoiseStream stream(cfg.seed, i);
                const auto regimes = sample_path(model.generator(), model.initial_regime(), cfg.horizon, stream);
                const auto em = simulate_em(model, regimes, dt, cfg.horizon, stream, options);
                const auto voc = simulate_voc(model, regimes, dt, cfg.horizon, stream, options);
                double worst = 0.0;
                for (std::size_t g = em.origin; g < em.x.size(); ++g) {
                    worst = std::max(worst, std::abs(em.x[g] - voc.x[g]));
                }
                return worst;
            },
            [&](std::size_t, double worst) { total += worst; });
        ConvergenceRow row;
        row.dt = dt;
        row.mean_max_error = total / static_cast<double>(cfg.n_paths);
        row.ratio = rows.empty() ? 0.0 : rows.back().mean_max_error / row.mean_max_error;
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "dt,mean_max_error,ratio\n";
    for (const auto& r : rows) {
        out << format_double(r.dt) << ',' << format_double(r.mean_max_error) << ',' << format_double(r.ratio)
            << '\n';
    }
}

}  // namespace nbf
