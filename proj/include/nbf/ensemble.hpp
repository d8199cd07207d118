#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nbf/bounds.hpp"
#include "nbf/integrators.hpp"
#include "nbf/model.hpp"

namespace nbf {

struct EnsembleConfig {
    std::size_t n_paths = 256;
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::VariationOfConstants;
    double theta = 1.0;
    std::optional<double> alpha;     ///< default beta-hat / 2
    std::optional<double> vartheta;  ///< default 1.05 p-check
    double tail_window = 0.2;        ///< trailing fraction of [0, T] used for asymptotics
    std::size_t workers = 0;         ///< 0 = hardware concurrency; never changes results
    std::size_t max_output_points = 10000;
};

/// Throws InvalidParameter when n_paths < 1, dt outside (0, T] or tail_window outside (0, 1].
void validate_config(const EnsembleConfig& cfg);

struct Summary {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct EnsembleStats {
    // provenance, checked by verify_bounds
    double theta = 1.0;
    double alpha = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    double tail_window = 0.2;
    std::size_t n_paths = 0;
    Scheme scheme = Scheme::VariationOfConstants;

    std::vector<double> t;             ///< output grid, t > 0, coarsened by stride
    std::vector<double> mean_x_theta;  ///< E[X^theta(t)]
    std::vector<double> ci_half;       ///< 95% normal-approximation half-width of mean_x_theta
    std::vector<double> mean_x2;       ///< E[X^2(t)]
    std::vector<double> time_avg;      ///< (1/t) int_0^t E[X^theta(s)] ds
    std::vector<Summary> lyap;         ///< log X(t) / t across paths
    std::vector<Summary> running_min;  ///< min of X over [t (1 - tail_window), t] across paths

    std::vector<double> final_x;        ///< X(T) per path
    std::vector<double> final_lyap;     ///< log X(T) / T per path
    std::vector<double> final_runmin;   ///< tail running minimum at T per path
    double min_x = 0.0;                 ///< min of X over all paths and t in [0, T]
    std::size_t positivity_violations = 0;  ///< paths with some X <= 0
};

/// Simulates cfg.n_paths independent (regime path, Brownian path) pairs; path i
/// draws from NoiseStream(cfg.seed, i). The result depends only on (model, cfg).
[[nodiscard]] EnsembleStats run_ensemble(const ValidatedModel& model, const EnsembleConfig& cfg);

/// Header: t,mean_x_theta,ci_half,time_avg,lyap_min,lyap_mean,lyap_max,runmin_mean
void write_stats_csv(std::ostream& out, const EnsembleStats& stats);

enum class Verdict { Consistent, Violated, NotApplicable };
[[nodiscard]] std::string_view to_string(Verdict v) noexcept;

enum class BoundSide { Upper, Lower };

struct BoundCheck {
    std::string name;
    std::string statistic;
    BoundSide side = BoundSide::Upper;
    double bound = 0.0;
    double empirical = 0.0;
    double half_width = 0.0;
    double margin = 0.0;  ///< room left before the bound; negative when the bound is crossed
    Verdict verdict = Verdict::NotApplicable;
    std::string note;
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    std::vector<CrossCheckRow> cross_check;

    [[nodiscard]] const BoundCheck& check(std::string_view name) const;
    [[nodiscard]] bool any_violated() const;
};

/// Relative slack applied on top of the confidence half-width: 5% of max(|bound|, 1).
inline constexpr double kVerdictSlack = 0.05;

/// Compares every analytic bound with its empirical counterpart. Throws
/// MismatchedConfig when stats and bounds disagree on theta or alpha.
[[nodiscard]] BoundReport verify_bounds(const EnsembleStats& stats, const TheoremBounds& bounds,
                                        std::vector<CrossCheckRow> cross_check = {});

void write_report_text(std::ostream& out, const BoundReport& report);
void write_report_kv(std::ostream& out, const BoundReport& report);

/// Plain-text table of the analytic bounds (per-regime constants, pi, bounds).
void write_bounds_table(std::ostream& out, const TheoremBounds& bounds,
                        const std::vector<CrossCheckRow>& cross_check);

struct ConvergenceRow {
    double dt = 0.0;
    double mean_max_error = 0.0;  ///< mean over paths of max_t |X_EM - X_VoC|
    double ratio = 0.0;           ///< previous row's error / this row's error; 0 for the first row
};

/// EM against VoC on shared Brownian paths for each dt. dts must be strictly
/// decreasing and each a power-of-two refinement of dts.front() (else
/// NonDyadicRefinement). Uses cfg.n_paths, cfg.horizon, cfg.seed, cfg.workers.
[[nodiscard]] std::vector<ConvergenceRow> convergence_study(const ValidatedModel& model, const EnsembleConfig& cfg,
                                                            const std::vector<double>& dts);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace nbf
