#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbf/ctmc.hpp"
#include "nbf/model.hpp"

namespace nbf {

/// sup_{x >= 0} x exp(-a x) = 1 / (a e). Throws NonPositiveA for a <= 0.
[[nodiscard]] double birth_term_bound(double a);

/// sup_x (a x^2 + b x) / (1 + x^2): (a + sqrt(a^2 + b^2)) / 2 for a >= 0, -b^2 / (4a) for a < 0.
/// Throws NonPositiveB for b <= 0.
[[nodiscard]] double quadratic_ratio_bound(double a, double b);

struct MinMaxBounds {
    double moment_bound = 0.0;         ///< M-hat, bounds limsup E[X^theta]
    double time_avg_bound = 0.0;       ///< W-hat / alpha
    double lyap_lower = 0.0;           ///< -d-check
    double lyap_upper = 0.0;           ///< C-check / 2
};

struct StationaryBounds {
    double time_avg_bound = 0.0;  ///< sum pi_i W_i / alpha
    double lyap_lower = 0.0;      ///< -sum pi_i d_i
    double lyap_upper = 0.0;      ///< sum pi_i C_i / 2
};

[[nodiscard]] MinMaxBounds minmax_bounds(const DerivedConstants& dc);
[[nodiscard]] StationaryBounds stationary_bounds(const DerivedConstants& dc, const StationaryDistribution& pi);

/// sum pi_i gamma_i / sum pi_i d_i
[[nodiscard]] double nstar(const DerivedConstants& dc, const StationaryDistribution& pi);

/// sum pi_i (d_i - p_i)
[[nodiscard]] double lambda_rate(const DerivedConstants& dc, const StationaryDistribution& pi);

/// Root kappa in (0, mu_hat] of kappa vartheta tau e^(kappa tau) + kappa = mu_hat, by
/// bisection (the left side is strictly increasing in kappa). tau = 0 gives mu_hat.
[[nodiscard]] double kappa_root(double mu_hat, double vartheta, double tau);

/// Per-regime delays; throws NonUniformDelay unless they are all equal.
[[nodiscard]] double kappa_root(double mu_hat, double vartheta, std::span<const double> taus);

/// Default vartheta: 1.05 * p-check, or 1e-6 when every p_i is zero.
[[nodiscard]] double default_vartheta(const ValidatedModel& model);

/// Every analytic quantity for one (model, theta, alpha, vartheta).
struct TheoremBounds {
    double theta = 1.0;
    double alpha = 0.0;
    double vartheta = 0.0;
    StationaryDistribution pi;
    DerivedConstants constants;

    double moment_bound_Mhat = 0.0;
    double time_avg_bound_What_over_alpha = 0.0;
    double time_avg_bound_pi = 0.0;
    double lyap_lower = 0.0;
    double lyap_upper = 0.0;
    double lyap_lower_minmax = 0.0;
    double lyap_upper_minmax = 0.0;
    double nstar = 0.0;
    double lambda = 0.0;
    double extinction_rate = 0.0;  ///< sum pi_i d_i

    bool all_birth_zero = false;   ///< every p_i = 0
    bool all_delay_zero = false;   ///< every tau_i = 0
    bool lambda_borderline = false;  ///< all tau_i = 0 and lambda = 0

    std::optional<double> kappa;
    double mu_hat = 0.0;
    double uniform_tau = 0.0;
    std::string kappa_note;  ///< why kappa is absent, if it is
};

/// Requires an irreducible chain (throws Reducible otherwise).
[[nodiscard]] TheoremBounds compute_theorem_bounds(const ValidatedModel& model, double theta, double alpha,
                                                   double vartheta);

struct CrossCheckRow {
    std::string quantity;
    double reference = 0.0;
    double computed = 0.0;
    bool agrees = false;
};

/// Reference values listed for the three-regime model next to the values
/// computed here. Empty unless the model is fixtures::three_regime().
[[nodiscard]] std::vector<CrossCheckRow> reference_cross_check(const ValidatedModel& model);

}  // namespace nbf
