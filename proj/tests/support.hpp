#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nbf/model.hpp"

namespace nbf::testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::size_t counter = 0;
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("nbf_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string first_line(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

/// Maximum of f(x) = theta*g*x^(theta-1) - b*x^theta over n geometric grid points on
/// [lo, hi]. The powers are advanced multiplicatively, so no pow call sits in the loop.
inline double grid_max(double theta, double g, double b, double lo, double hi, std::size_t n) {
    const double r = std::pow(hi / lo, 1.0 / static_cast<double>(n - 1));
    const double step_tm1 = std::pow(r, theta - 1.0);
    double xtm1 = std::pow(lo, theta - 1.0);
    double x = lo;
    double best = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = theta * g * xtm1 - b * xtm1 * x;
        best = f > best ? f : best;
        xtm1 *= step_tm1;
        x *= r;
    }
    return best;
}

/// Grid oracle for one of M_i (b = beta_i) or W_i (b = beta_i - alpha): the grid spans
/// (0, 10 x*] with x* = (theta-1) g / b; for theta = 1 the supremum sits at x -> 0, so
/// the grid reaches down to 1e-12 of the scale g / b.
inline double grid_oracle(double theta, double g, double b, std::size_t n) {
    if (g == 0.0) {
        return 0.0;
    }
    const double scale = g / b;
    const double xstar = theta > 1.0 ? (theta - 1.0) * scale : scale;
    return grid_max(theta, g, b, xstar * 1e-6 * (theta > 1.0 ? 1.0 : 1e-6), 10.0 * xstar, n);
}

/// Random generator with off-diagonal rates in [lo, hi] (hence irreducible).
inline std::vector<std::vector<double>> random_generator(std::mt19937_64& rng, std::size_t m, double lo = 0.1,
                                                         double hi = 10.0) {
    std::uniform_real_distribution<double> rate(lo, hi);
    std::vector<std::vector<double>> q(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) {
                q[i][j] = rate(rng);
                sum += q[i][j];
            }
        }
        q[i][i] = -sum;
    }
    return q;
}

struct RandomModelRanges {
    double delta_lo = 0.1, delta_hi = 5.0;
    double p_lo = 0.0, p_hi = 10.0;
    double a_lo = 0.1, a_hi = 2.0;
    double sigma_lo = 0.0, sigma_hi = 3.0;
    double tau_lo = 0.0, tau_hi = 2.0;
};

inline ModelSpec random_model(std::mt19937_64& rng, std::size_t m, const RandomModelRanges& r = {}) {
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    ModelSpec spec;
    double tau_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        RegimeParams p{.delta = u(r.delta_lo, r.delta_hi),
                       .p = u(r.p_lo, r.p_hi),
                       .tau = u(r.tau_lo, r.tau_hi),
                       .a = u(r.a_lo, r.a_hi),
                       .sigma = u(r.sigma_lo, r.sigma_hi)};
        tau_max = std::max(tau_max, p.tau);
        spec.regimes.push_back(p);
    }
    spec.generator = GeneratorMatrix(m == 1 ? std::vector<std::vector<double>>{{0.0}} : random_generator(rng, m));
    spec.history = InitialHistory::constant(u(0.1, 3.0), tau_max);
    spec.initial_regime = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
    return spec;
}

}  // namespace nbf::testing
