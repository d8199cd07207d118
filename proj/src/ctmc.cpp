#include "nbf/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nbf/format.hpp"

namespace nbf {

double StationaryDistribution::weighted_sum(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        s += pi[i] * v[i];
    }
    return s;
}

std::size_t RegimePath::state_at(double t) const {
    auto it = std::upper_bound(events.begin(), events.end(), t,
                               [](double v, const RegimeEvent& e) { return v < e.time; });
    return it == events.begin() ? events.front().state : std::prev(it)->state;
}

bool is_irreducible(const GeneratorMatrix& q) {
    const std::size_t m = q.size();
    if (m == 0) {
        return false;
    }
    // Strongly connected iff every state is reachable from 0 in the graph and in its transpose.
    auto reaches_all = [&](bool transpose) {
        std::vector<char> seen(m, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < m; ++j) {
                const double rate = transpose ? q(j, i) : q(i, j);
                if (j != i && rate > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reaches_all(false) && reaches_all(true);
}

StationaryDistribution stationary_distribution(const GeneratorMatrix& q) {
    if (const auto bad = check_generator(q); !bad.empty()) {
        throw Error(bad.front().code, bad.front().message);
    }
    if (!is_irreducible(q)) {
        throw Error(ErrorCode::Reducible, "stationary distribution requires an irreducible generator");
    }
    const std::size_t m = q.size();
    // Rows of A are the balance equations sum_i pi_i q_ij = 0; the last one is
    // replaced by sum_i pi_i = 1.
    std::vector<double> a(m * m);
    std::vector<double> b(m, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            a[j * m + i] = q(i, j);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        a[(m - 1) * m + i] = 1.0;
    }
    b[m - 1] = 1.0;

    double scale = 0.0;
    for (double v : a) {
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(a[r * m + col]) > std::abs(a[pivot * m + col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot * m + col]) <= 1e-14 * scale) {
            throw Error(ErrorCode::SingularSystem, "generator balance system is numerically singular");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < m; ++c) {
                std::swap(a[pivot * m + c], a[col * m + c]);
            }
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = a[r * m + col] / a[col * m + col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < m; ++c) {
                a[r * m + c] -= f * a[col * m + c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> pi(m);
    for (std::size_t k = m; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < m; ++c) {
            s -= a[k * m + c] * pi[c];
        }
        pi[k] = s / a[k * m + k];
    }
    // Round-off can leave tiny negatives; the normalisation row already holds.
    for (double& v : pi) {
        v = std::max(v, 0.0);
    }
    double total = 0.0;
    for (double v : pi) {
        total += v;
    }
    for (double& v : pi) {
        v /= total;
    }
    return StationaryDistribution{std::move(pi)};
}

double stationary_residual(const StationaryDistribution& pi, const GeneratorMatrix& q) {
    double worst = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            s += pi[i] * q(i, j);
        }
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

RegimePath sample_path(const GeneratorMatrix& q, std::size_t initial_state, double horizon,
                       const NoiseStream& stream) {
    if (initial_state >= q.size()) {
        throw Error(ErrorCode::OutOfRange, "initial state " + std::to_string(initial_state + 1) + " outside 1.." +
                                               std::to_string(q.size()));
    }
    if (!(horizon > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "path horizon must be positive");
    }
    RegimePath path;
    path.horizon = horizon;
    path.state_count = q.size();
    path.events.push_back({0.0, initial_state});

    std::size_t state = initial_state;
    double t = 0.0;
    for (std::uint64_t k = 0;; ++k) {
        const double rate = q.exit_rate(state);
        if (!(rate > 0.0)) {
            break;  // absorbing
        }
        const auto [u_hold, u_jump] = stream.uniform_pair(NoiseDomain::Regime, k);
        t += -std::log(u_hold) / rate;
        if (!(t <= horizon)) {
            break;
        }
        double target = u_jump * rate;
        std::size_t next = state;
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (j == state || q(state, j) <= 0.0) {
                continue;
            }
            next = j;
            target -= q(state, j);
            if (target < 0.0) {
                break;
            }
        }
        state = next;
        path.events.push_back({t, state});
    }
    return path;
}

std::vector<double> occupation_fractions(const RegimePath& path, double horizon) {
    if (path.horizon < horizon) {
        throw Error(ErrorCode::OutOfRange, "path horizon shorter than requested window");
    }
    std::vector<double> out(path.state_count, 0.0);
    for (std::size_t k = 0; k < path.events.size(); ++k) {
        const double start = path.events[k].time;
        if (start >= horizon) {
            break;
        }
        const double end = k + 1 < path.events.size() ? std::min(path.events[k + 1].time, horizon) : horizon;
        out[path.events[k].state] += end - start;
    }
    for (double& v : out) {
        v /= horizon;
    }
    return out;
}

void write_regime_path_csv(std::ostream& out, const RegimePath& path) {
    out << "time,state\n";
    for (const auto& e : path.events) {
        out << format_double(e.time) << ',' << e.state + 1 << '\n';
    }
}

}  // namespace nbf
