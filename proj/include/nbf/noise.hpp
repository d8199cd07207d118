#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nbf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key) noexcept;

/// Stream domains; keep regime sampling and Brownian increments disjoint.
enum class NoiseDomain : std::uint32_t {
    Brownian = 0,
    BridgeSplit = 1,
    Regime = 2,
    Aux = 3,
};

/// A reproducible source of randomness identified by (seed, substream). Every
/// draw is a pure function of (seed, substream, domain, index, slot), so
/// results never depend on call order or thread scheduling.
class NoiseStream {
public:
    constexpr NoiseStream() = default;
    constexpr NoiseStream(std::uint64_t seed, std::uint64_t substream) noexcept
        : seed_(seed), substream_(substream) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t substream() const noexcept { return substream_; }

    /// Two independent standard normals (Box-Muller on one Philox block).
    [[nodiscard]] std::array<double, 2> normal_pair(NoiseDomain domain, std::uint64_t index,
                                                    std::uint32_t slot = 0) const noexcept;
    [[nodiscard]] double normal(NoiseDomain domain, std::uint64_t index, std::uint32_t slot = 0) const noexcept {
        return normal_pair(domain, index, slot)[0];
    }
    /// Two independent uniforms on the open interval (0, 1).
    [[nodiscard]] std::array<double, 2> uniform_pair(NoiseDomain domain, std::uint64_t index,
                                                     std::uint32_t slot = 0) const noexcept;

    bool operator==(const NoiseStream&) const = default;

private:
    [[nodiscard]] std::array<std::uint32_t, 4> block(NoiseDomain domain, std::uint64_t index,
                                                     std::uint32_t slot) const noexcept;

    std::uint64_t seed_ = 0;
    std::uint64_t substream_ = 0;
};

/// Brownian increments on a dyadic family of grids. The path is built cell by
/// cell on a base grid of width base_dt; inside a base cell a Levy midpoint
/// bridge refines to 2^level sub-cells. Any two levels of the same family see
/// the same Brownian path: a coarse increment equals the sum of its fine ones.
class BrownianIncrements {
public:
    BrownianIncrements(NoiseStream stream, double base_dt, unsigned level);

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double base_dt() const noexcept { return base_dt_; }
    [[nodiscard]] unsigned level() const noexcept { return level_; }
    [[nodiscard]] const NoiseStream& stream() const noexcept { return stream_; }

    /// Increment B((n+1) dt) - B(n dt) of fine cell n.
    [[nodiscard]] double cell(std::uint64_t n);

    /// Splits the increment w of fine cell n (width h) at the given fractions of
    /// the cell using a conditional Brownian bridge; the pieces sum to w.
    /// fractions must be strictly increasing in (0, 1).
    void split(std::uint64_t n, double w, double h, const std::vector<double>& fractions,
               std::vector<double>& pieces) const;

private:
    void fill_base_cell(std::uint64_t base_index);

    NoiseStream stream_;
    double base_dt_;
    unsigned level_;
    double dt_;
    std::uint64_t cached_base_ = ~std::uint64_t{0};
    std::vector<double> leaves_;
    std::vector<double> scratch_;
};

/// Smallest level such that base_dt / 2^level == dt within a relative 1e-9;
/// returns -1 when dt is not a dyadic refinement of base_dt.
[[nodiscard]] int dyadic_level(double base_dt, double dt) noexcept;

}  // namespace nbf
