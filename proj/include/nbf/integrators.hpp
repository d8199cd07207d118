#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "nbf/ctmc.hpp"
#include "nbf/model.hpp"
#include "nbf/noise.hpp"

namespace nbf {

enum class Scheme {
    VariationOfConstants,  ///< positivity-preserving, exact when G = 0
    EulerMaruyama,
};

[[nodiscard]] std::string_view to_string(Scheme s) noexcept;
[[nodiscard]] Scheme parse_scheme(std::string_view name);  ///< "voc" | "em"

/// Brownian increments consumed by one integration, one per substep.
struct NoiseRecord {
    std::uint64_t seed = 0;
    std::uint64_t substream = 0;
    std::vector<double> increments;

    bool operator==(const NoiseRecord&) const = default;
};

/// A simulated path on [-tau_max, T]. The grid holds every multiple of dt,
/// every regime jump time and every history sample time.
struct TrajectoryGrid {
    std::vector<double> times;
    std::vector<double> x;
    /// regime[k] is the (0-based) state active on [times[k], times[k+1]).
    std::vector<std::uint32_t> regime;
    std::size_t origin = 0;  ///< index of t = 0
    NoiseRecord noise;       ///< increments for the substeps starting at origin
    bool negative_excursion = false;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// X(t) for t in [times.front(), times.back()]: the stored value at a grid
/// point, linear interpolation in between. Throws OutOfRange otherwise.
[[nodiscard]] double history_lookup(const TrajectoryGrid& traj, double t);

struct IntegrationOptions {
    /// Coarsest step of the dyadic family the Brownian path belongs to; 0 means
    /// dt itself. Runs sharing (stream, base_dt) share one Brownian path.
    double base_dt = 0.0;
};

/// Variation-of-constants step on each substep [s, s+h] in regime i:
///   X(s+h) = exp(-(delta_i + sigma_i^2/2) h + sigma_i dB) * (X(s) + h G(X(s - tau_i), i)).
/// Strictly positive whenever the history is.
[[nodiscard]] TrajectoryGrid simulate_voc(const ValidatedModel& model, const RegimePath& path, double dt,
                                          double horizon, const NoiseStream& stream,
                                          const IntegrationOptions& options = {});

/// Euler-Maruyama: X + (-delta_i X + G(X(s - tau_i), i)) h + sigma_i X dB.
/// Values are never clamped; negative_excursion is set when any X <= 0.
[[nodiscard]] TrajectoryGrid simulate_em(const ValidatedModel& model, const RegimePath& path, double dt,
                                         double horizon, const NoiseStream& stream,
                                         const IntegrationOptions& options = {});

[[nodiscard]] TrajectoryGrid simulate(Scheme scheme, const ValidatedModel& model, const RegimePath& path,
                                      double dt, double horizon, const NoiseStream& stream,
                                      const IntegrationOptions& options = {});

/// CSV "<time_header>,x,regime" with 1-based regimes.
void write_trajectory_csv(std::ostream& out, const TrajectoryGrid& traj, std::string_view time_header = "time",
                          std::size_t stride = 1);

}  // namespace nbf
