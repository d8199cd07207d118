#include "nbf/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nbf/error.hpp"

namespace nbf {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Bridge node ids are carried in the 14-bit slot field.
constexpr unsigned kMaxLevel = 13;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::array<std::uint32_t, 4> NoiseStream::block(NoiseDomain domain, std::uint64_t index,
                                                 std::uint32_t slot) const noexcept {
    // counter layout: [index lo32 | index hi16, slot14, domain2 | substream lo32 | substream hi32]
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>((index >> 32) & 0xFFFFu) | ((slot & 0x3FFFu) << 16) |
            (static_cast<std::uint32_t>(domain) << 30),
        static_cast<std::uint32_t>(substream_),
        static_cast<std::uint32_t>(substream_ >> 32),
    };
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    return philox4x32(ctr, key);
}

std::array<double, 2> NoiseStream::uniform_pair(NoiseDomain domain, std::uint64_t index,
                                                std::uint32_t slot) const noexcept {
    const auto b = block(domain, index, slot);
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
}

std::array<double, 2> NoiseStream::normal_pair(NoiseDomain domain, std::uint64_t index,
                                               std::uint32_t slot) const noexcept {
    const auto [u1, u2] = uniform_pair(domain, index, slot);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phase), r * std::sin(phase)};
}

BrownianIncrements::BrownianIncrements(NoiseStream stream, double base_dt, unsigned level)
    : stream_(stream), base_dt_(base_dt), level_(level), dt_(std::ldexp(base_dt, -static_cast<int>(level))) {
    if (!(base_dt > 0.0) || !std::isfinite(base_dt)) {
        throw Error(ErrorCode::InvalidParameter, "Brownian base step must be positive and finite");
    }
    if (level > kMaxLevel) {
        throw Error(ErrorCode::NonDyadicRefinement,
                    "refinement level " + std::to_string(level) + " exceeds " + std::to_string(kMaxLevel));
    }
    leaves_.resize(std::size_t{1} << level_);
    scratch_.resize(leaves_.size());
}

void BrownianIncrements::fill_base_cell(std::uint64_t b) {
    const auto root = stream_.normal_pair(NoiseDomain::Brownian, b >> 1, 0);
    leaves_[0] = std::sqrt(base_dt_) * root[b & 1u];
    std::size_t count = 1;
    double width = base_dt_;
    for (unsigned depth = 0; depth < level_; ++depth) {
        const double half_sd = 0.5 * std::sqrt(width);
        for (std::size_t k = 0; k < count; ++k) {
            const auto node = static_cast<std::uint32_t>(count + k);
            const double w = leaves_[k];
            const double left = 0.5 * w + half_sd * stream_.normal(NoiseDomain::Brownian, b, node);
            scratch_[2 * k] = left;
            scratch_[2 * k + 1] = w - left;
        }
        count *= 2;
        width *= 0.5;
        std::copy_n(scratch_.begin(), count, leaves_.begin());
    }
    cached_base_ = b;
}

double BrownianIncrements::cell(std::uint64_t n) {
    const std::uint64_t b = n >> level_;
    if (b != cached_base_) {
        fill_base_cell(b);
    }
    return leaves_[n & ((std::uint64_t{1} << level_) - 1)];
}

void BrownianIncrements::split(std::uint64_t n, double w, double h, const std::vector<double>& fractions,
                               std::vector<double>& pieces) const {
    pieces.clear();
    double remaining = w;
    double u_prev = 0.0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        const double u = fractions[k];
        const double span = 1.0 - u_prev;
        const double mean = remaining * (u - u_prev) / span;
        const double var = h * (u - u_prev) * (1.0 - u) / span;
        const double z = stream_.normal(NoiseDomain::BridgeSplit, n, static_cast<std::uint32_t>(k));
        const double piece = mean + std::sqrt(std::max(var, 0.0)) * z;
        pieces.push_back(piece);
        remaining -= piece;
        u_prev = u;
    }
    pieces.push_back(remaining);
}

int dyadic_level(double base_dt, double dt) noexcept {
    if (!(base_dt > 0.0) || !(dt > 0.0) || dt > base_dt * (1.0 + 1e-9)) {
        return -1;
    }
    const int level = static_cast<int>(std::lround(std::log2(base_dt / dt)));
    if (level < 0 || std::abs(std::ldexp(base_dt, -level) - dt) > 1e-9 * dt) {
        return -1;
    }
    return level;
}

}  // namespace nbf
