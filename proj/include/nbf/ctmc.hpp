#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nbf/model.hpp"
#include "nbf/noise.hpp"

namespace nbf {

struct StationaryDistribution {
    std::vector<double> pi;

    [[nodiscard]] double operator[](std::size_t i) const { return pi[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return pi.size(); }
    [[nodiscard]] double weighted_sum(const std::vector<double>& v) const;
};

struct RegimeEvent {
    double time;
    std::size_t state;  ///< 0-based

    bool operator==(const RegimeEvent&) const = default;
};

/// Right-continuous piecewise-constant CTMC trajectory on [0, horizon].
struct RegimePath {
    std::vector<RegimeEvent> events;
    double horizon = 0.0;
    std::size_t state_count = 1;

    /// State active at time t (right-continuous).
    [[nodiscard]] std::size_t state_at(double t) const;

    bool operator==(const RegimePath&) const = default;
};

/// Strong connectivity of the graph with edges i -> j where q_ij > 0.
[[nodiscard]] bool is_irreducible(const GeneratorMatrix& q);

/// Solves pi Q = 0, sum pi = 1 by Gaussian elimination with partial pivoting,
/// the last balance equation replaced by the normalisation row.
[[nodiscard]] StationaryDistribution stationary_distribution(const GeneratorMatrix& q);

/// max_j |(pi Q)_j|
[[nodiscard]] double stationary_residual(const StationaryDistribution& pi, const GeneratorMatrix& q);

/// Exact (event-driven) sample of the chain on [0, horizon]. Holding times are
/// Exponential(-q_ii); the jump target j is chosen with probability q_ij / -q_ii.
/// States with q_ii = 0 are absorbing.
[[nodiscard]] RegimePath sample_path(const GeneratorMatrix& q, std::size_t initial_state, double horizon,
                                     const NoiseStream& stream);

/// Fraction of [0, horizon] spent in each state.
[[nodiscard]] std::vector<double> occupation_fractions(const RegimePath& path, double horizon);

/// CSV with header "time,state"; states written 1-based.
void write_regime_path_csv(std::ostream& out, const RegimePath& path);

}  // namespace nbf
