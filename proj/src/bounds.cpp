#include "nbf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nbf/fixtures.hpp"

namespace nbf {

namespace {

void require_same_size(const DerivedConstants& dc, const StationaryDistribution& pi) {
    if (pi.size() != dc.d.size()) {
        throw Error(ErrorCode::PreconditionViolation, "stationary distribution has " + std::to_string(pi.size()) +
                                                          " states, constants have " + std::to_string(dc.d.size()));
    }
}

double kappa_lhs(double kappa, double vartheta, double tau) {
    return kappa * vartheta * tau * std::exp(kappa * tau) + kappa;
}

}  // namespace

double birth_term_bound(double a) {
    if (!(a > 0.0)) {
        throw Error(ErrorCode::NonPositiveA, "a must be > 0");
    }
    return 1.0 / (a * std::numbers::e);
}

double quadratic_ratio_bound(double a, double b) {
    if (!(b > 0.0)) {
        throw Error(ErrorCode::NonPositiveB, "b must be > 0");
    }
    if (a >= 0.0) {
        return (a + std::sqrt(a * a + b * b)) / 2.0;
    }
    return -b * b / (4.0 * a);
}

MinMaxBounds minmax_bounds(const DerivedConstants& dc) {
    if (!(dc.theta >= 1.0) || !(dc.alpha > 0.0 && dc.alpha < dc.beta.hat)) {
        throw Error(ErrorCode::PreconditionViolation, "theta must be >= 1 and alpha inside (0, beta-hat)");
    }
    MinMaxBounds b;
    b.moment_bound = dc.bigM.hat;
    b.time_avg_bound = dc.bigW.hat / dc.alpha;
    b.lyap_lower = -dc.d.check;
    b.lyap_upper = dc.bigC.check / 2.0;
    return b;
}

StationaryBounds stationary_bounds(const DerivedConstants& dc, const StationaryDistribution& pi) {
    require_same_size(dc, pi);
    StationaryBounds b;
    b.time_avg_bound = pi.weighted_sum(dc.bigW.values) / dc.alpha;
    b.lyap_lower = -pi.weighted_sum(dc.d.values);
    b.lyap_upper = pi.weighted_sum(dc.bigC.values) / 2.0;
    return b;
}

double nstar(const DerivedConstants& dc, const StationaryDistribution& pi) {
    require_same_size(dc, pi);
    return pi.weighted_sum(dc.gamma.values) / pi.weighted_sum(dc.d.values);
}

double lambda_rate(const DerivedConstants& dc, const StationaryDistribution& pi) {
    require_same_size(dc, pi);
    return pi.weighted_sum(dc.d.values) - pi.weighted_sum(dc.p.values);
}

double kappa_root(double mu_hat, double vartheta, double tau) {
    if (!(mu_hat > 0.0) || !std::isfinite(mu_hat)) {
        throw Error(ErrorCode::NonPositiveMu, "mu-hat must be > 0");
    }
    if (!(vartheta > 0.0)) {
        throw Error(ErrorCode::PreconditionViolation, "vartheta must be > 0");
    }
    if (!(tau >= 0.0)) {
        throw Error(ErrorCode::PreconditionViolation, "tau must be >= 0");
    }
    if (tau == 0.0) {
        return mu_hat;
    }
    double lo = 0.0;
    double hi = mu_hat;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (kappa_lhs(mid, vartheta, tau) > mu_hat) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double r_lo = std::abs(kappa_lhs(lo, vartheta, tau) - mu_hat);
    const double r_hi = std::abs(kappa_lhs(hi, vartheta, tau) - mu_hat);
    return r_lo <= r_hi ? lo : hi;
}

double kappa_root(double mu_hat, double vartheta, std::span<const double> taus) {
    if (taus.empty()) {
        throw Error(ErrorCode::PreconditionViolation, "no delays given");
    }
    for (double t : taus) {
        if (t != taus.front()) {
            throw Error(ErrorCode::NonUniformDelay, "kappa needs a common delay for every regime");
        }
    }
    return kappa_root(mu_hat, vartheta, taus.front());
}

double default_vartheta(const ValidatedModel& model) {
    double p_check = 0.0;
    for (const auto& r : model.spec().regimes) {
        p_check = std::max(p_check, r.p);
    }
    return p_check > 0.0 ? 1.05 * p_check : 1e-6;
}

TheoremBounds compute_theorem_bounds(const ValidatedModel& model, double theta, double alpha, double vartheta) {
    if (!model.irreducible()) {
        throw Error(ErrorCode::Reducible, "stationary-distribution bounds need an irreducible regime chain");
    }
    TheoremBounds tb;
    tb.theta = theta;
    tb.alpha = alpha;
    tb.vartheta = vartheta;
    tb.constants = derived_constants(model, theta, alpha);
    tb.pi = stationary_distribution(model.generator());
    const auto& dc = tb.constants;

    const auto minmax = minmax_bounds(dc);
    tb.moment_bound_Mhat = minmax.moment_bound;
    tb.time_avg_bound_What_over_alpha = minmax.time_avg_bound;
    tb.lyap_lower_minmax = minmax.lyap_lower;
    tb.lyap_upper_minmax = minmax.lyap_upper;

    const auto stationary = stationary_bounds(dc, tb.pi);
    tb.time_avg_bound_pi = stationary.time_avg_bound;
    tb.lyap_lower = stationary.lyap_lower;
    tb.lyap_upper = stationary.lyap_upper;

    tb.nstar = nstar(dc, tb.pi);
    tb.lambda = lambda_rate(dc, tb.pi);
    tb.extinction_rate = tb.pi.weighted_sum(dc.d.values);

    const auto& regimes = model.spec().regimes;
    tb.all_birth_zero = std::all_of(regimes.begin(), regimes.end(), [](const auto& r) { return r.p == 0.0; });
    tb.all_delay_zero = std::all_of(regimes.begin(), regimes.end(), [](const auto& r) { return r.tau == 0.0; });
    tb.lambda_borderline = tb.all_delay_zero && tb.lambda == 0.0;

    tb.mu_hat = dc.mu.hat;
    tb.uniform_tau = regimes.front().tau;
    const bool uniform_tau =
        std::all_of(regimes.begin(), regimes.end(), [&](const auto& r) { return r.tau == regimes.front().tau; });
    const bool uniform_a =
        std::all_of(regimes.begin(), regimes.end(), [&](const auto& r) { return r.a == regimes.front().a; });
    if (!uniform_tau) {
        tb.kappa_note = "delays differ between regimes";
    } else if (!uniform_a) {
        tb.kappa_note = "a differs between regimes";
    } else if (!(tb.mu_hat > 0.0)) {
        tb.kappa_note = "mu-hat <= 0";
    } else if (!(vartheta > dc.p.check)) {
        tb.kappa_note = "vartheta <= p-check";
    } else {
        tb.kappa = kappa_root(tb.mu_hat, vartheta, tb.uniform_tau);
    }
    return tb;
}

std::vector<CrossCheckRow> reference_cross_check(const ValidatedModel& model) {
    std::vector<CrossCheckRow> rows;
    if (!fixtures::is_three_regime(model.spec())) {
        return rows;
    }
    const auto pi = stationary_distribution(model.generator());
    const auto dc1 = derived_constants(model, 1.0, default_alpha(model, 1.0));
    const auto dc75 = derived_constants(model, 1.4, default_alpha(model, 1.4));

    auto add = [&](std::string name, double reference, double computed, double tol) {
        rows.push_back({std::move(name), reference, computed, std::abs(reference - computed) <= tol});
    };
    const double ref_pi[] = {0.1845, 0.6019, 0.2136};
    const double ref_d[] = {3.125, 3.0, 8.5};
    const double ref_c[] = {2.1022, 3.6788, 10.3229};
    for (std::size_t i = 0; i < 3; ++i) {
        add("pi_" + std::to_string(i + 1), ref_pi[i], pi[i], 1e-4);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        add("d_" + std::to_string(i + 1), ref_d[i], dc1.d[i], 1e-12);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        add("C_" + std::to_string(i + 1), ref_c[i], dc1.bigC[i], 1e-3);
    }
    add("N*", 1.1883, nstar(dc1, pi), 1e-3);
    add("lyap_lower (-sum pi d)", -4.1978, -pi.weighted_sum(dc1.d.values), 1e-3);
    add("lyap_upper (sum pi C / 2)", 2.4035, pi.weighted_sum(dc1.bigC.values) / 2.0, 1e-3);
    add("moment bound, theta=1", 1.1221, dc1.bigM.hat, 1e-3);
    add("moment bound, theta=7/5", 0.3713, dc75.bigM.hat, 1e-3);
    return rows;
}

}  // namespace nbf
