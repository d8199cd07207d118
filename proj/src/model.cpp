#include "nbf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nbf/ctmc.hpp"

namespace nbf {

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string join_messages(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << violations.size() << " violation(s)";
    for (const auto& v : violations) {
        os << "; " << to_string(v.code) << ": " << v.message;
    }
    return os.str();
}

ErrorCode first_code(const std::vector<Violation>& violations) {
    return violations.empty() ? ErrorCode::InvalidParameter : violations.front().code;
}

}  // namespace

GeneratorMatrix::GeneratorMatrix(const std::vector<std::vector<double>>& rows) : m_(rows.size()) {
    q_.reserve(m_ * m_);
    for (const auto& row : rows) {
        if (row.size() != m_) {
            throw Error(ErrorCode::DimensionMismatch, "generator must be square, got a row of length " +
                                                          std::to_string(row.size()) + " in a " +
                                                          std::to_string(m_) + "-row matrix");
        }
        q_.insert(q_.end(), row.begin(), row.end());
    }
}

std::vector<std::vector<double>> GeneratorMatrix::rows() const {
    std::vector<std::vector<double>> out(m_);
    for (std::size_t i = 0; i < m_; ++i) {
        out[i].assign(q_.begin() + static_cast<std::ptrdiff_t>(i * m_),
                      q_.begin() + static_cast<std::ptrdiff_t>((i + 1) * m_));
    }
    return out;
}

InitialHistory InitialHistory::constant(double value, double tau_max) {
    InitialHistory h;
    h.constant_ = true;
    h.tau_max_ = tau_max;
    if (tau_max > 0.0) {
        h.samples_ = {{-tau_max, value}, {0.0, value}};
    } else {
        h.samples_ = {{0.0, value}};
    }
    return h;
}

InitialHistory InitialHistory::from_samples(std::vector<HistorySample> samples, double tau_max) {
    InitialHistory h;
    h.constant_ = false;
    h.tau_max_ = tau_max;
    h.samples_ = std::move(samples);
    return h;
}

double InitialHistory::operator()(double t) const {
    if (samples_.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (t <= samples_.front().time) {
        return samples_.front().value;
    }
    if (t >= samples_.back().time) {
        return samples_.back().value;
    }
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double v, const HistorySample& s) { return v < s.time; });
    auto lo = hi - 1;
    if (lo->time == t) {
        return lo->value;
    }
    const double w = (t - lo->time) / (hi->time - lo->time);
    return lo->value + w * (hi->value - lo->value);
}

double nicholson_birth(double delayed_x, const RegimeParams& regime) noexcept {
    return regime.p * delayed_x * std::exp(-regime.a * delayed_x);
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(first_code(violations), join_messages(violations)), violations_(std::move(violations)) {}

std::vector<Violation> check_generator(const GeneratorMatrix& q) {
    std::vector<Violation> out;
    const std::size_t m = q.size();
    if (m == 0) {
        out.push_back({ErrorCode::DimensionMismatch, "generator has no states"});
        return out;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double row_sum = 0.0;
        double scale = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double v = q(i, j);
            if (!std::isfinite(v)) {
                out.push_back({ErrorCode::NonGenerator, "q[" + std::to_string(i + 1) + "][" +
                                                            std::to_string(j + 1) + "] is not finite"});
            }
            if (i != j && v < 0.0) {
                out.push_back({ErrorCode::NonGenerator, "off-diagonal q[" + std::to_string(i + 1) + "][" +
                                                            std::to_string(j + 1) + "] is negative"});
            }
            row_sum += v;
            scale = std::max(scale, std::abs(v));
        }
        if (std::abs(row_sum) > kRowSumTolerance * std::max(1.0, scale)) {
            std::ostringstream os;
            os << "row " << i + 1 << " sums to " << row_sum << ", expected 0";
            out.push_back({ErrorCode::NonGenerator, os.str()});
        }
    }
    return out;
}

std::vector<Violation> check_model(const ModelSpec& spec, bool require_irreducible) {
    std::vector<Violation> out;
    const std::size_t m = spec.regimes.size();
    if (m == 0) {
        out.push_back({ErrorCode::DimensionMismatch, "model has no regimes"});
    }
    if (spec.generator.size() != m) {
        out.push_back({ErrorCode::DimensionMismatch, std::to_string(m) + " regimes but a " +
                                                         std::to_string(spec.generator.size()) + "-state generator"});
    }
    double tau_needed = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = spec.regimes[i];
        const std::string tag = "regime " + std::to_string(i + 1) + ": ";
        if (!(r.delta > 0.0) || !std::isfinite(r.delta)) {
            out.push_back({ErrorCode::InvalidParameter, tag + "delta must be > 0"});
        }
        if (!(r.a > 0.0) || !std::isfinite(r.a)) {
            out.push_back({ErrorCode::InvalidParameter, tag + "a must be > 0"});
        }
        if (!(r.p >= 0.0) || !std::isfinite(r.p)) {
            out.push_back({ErrorCode::InvalidParameter, tag + "p must be >= 0"});
        }
        if (!(r.tau >= 0.0) || !std::isfinite(r.tau)) {
            out.push_back({ErrorCode::InvalidParameter, tag + "tau must be >= 0"});
        }
        if (!(r.sigma >= 0.0) || !std::isfinite(r.sigma)) {
            out.push_back({ErrorCode::InvalidParameter, tag + "sigma must be >= 0"});
        }
        if (std::isfinite(r.tau)) {
            tau_needed = std::max(tau_needed, r.tau);
        }
    }

    bool generator_ok = spec.generator.size() == m && m > 0;
    if (spec.generator.size() > 0) {
        auto gen = check_generator(spec.generator);
        generator_ok = generator_ok && gen.empty();
        out.insert(out.end(), gen.begin(), gen.end());
    }

    if (m > 0 && spec.initial_regime >= m) {
        out.push_back({ErrorCode::OutOfRange, "initial_regime " + std::to_string(spec.initial_regime + 1) +
                                                  " outside 1.." + std::to_string(m)});
    }

    const auto& h = spec.history;
    if (h.tau_max() < tau_needed) {
        std::ostringstream os;
        os << "history covers " << h.tau_max() << " but the largest delay is " << tau_needed;
        out.push_back({ErrorCode::NonPositiveHistory, os.str()});
    }
    const auto samples = h.samples();
    if (samples.empty()) {
        out.push_back({ErrorCode::NonPositiveHistory, "history has no samples"});
    } else {
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (!(samples[k].value > 0.0) || !std::isfinite(samples[k].value)) {
                out.push_back({ErrorCode::NonPositiveHistory,
                               "history value at sample " + std::to_string(k + 1) + " must be > 0"});
            }
            if (k > 0 && !(samples[k].time > samples[k - 1].time)) {
                out.push_back({ErrorCode::NonPositiveHistory, "history sample times must be strictly increasing"});
            }
        }
        if (samples.back().time != 0.0) {
            out.push_back({ErrorCode::NonPositiveHistory, "last history sample must be at time 0"});
        }
        if (samples.front().time > -h.tau_max()) {
            out.push_back({ErrorCode::NonPositiveHistory, "first history sample must be at or before -tau_max"});
        }
    }

    if (require_irreducible && generator_ok && !is_irreducible(spec.generator)) {
        out.push_back({ErrorCode::Reducible, "the regime chain is not irreducible"});
    }
    return out;
}

ValidatedModel validate_model(ModelSpec spec, bool require_irreducible) {
    auto violations = check_model(spec, require_irreducible);
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
    const bool irreducible = is_irreducible(spec.generator);
    return ValidatedModel(std::move(spec), irreducible);
}

RegimeVector::RegimeVector(std::vector<double> v) : values(std::move(v)) {
    if (!values.empty()) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        hat = *lo;
        check = *hi;
    }
}

double theta_upper_bound(const ValidatedModel& model) {
    double rho_hat = std::numeric_limits<double>::infinity();
    for (const auto& r : model.spec().regimes) {
        if (r.sigma > 0.0) {
            rho_hat = std::min(rho_hat, r.delta / (r.sigma * r.sigma));
        }
    }
    return 1.0 + 2.0 * rho_hat;
}

double default_alpha(const ValidatedModel& model, double theta) {
    double beta_hat = std::numeric_limits<double>::infinity();
    for (const auto& r : model.spec().regimes) {
        beta_hat = std::min(beta_hat, theta * (r.delta + (1.0 - theta) * r.sigma * r.sigma / 2.0));
    }
    return beta_hat / 2.0;
}

double log_growth_constant(double delta, double sigma, double gamma) noexcept {
    const double s2 = sigma * sigma;
    if (delta <= s2 / 2.0) {
        const double k = s2 - 2.0 * delta;
        return (k + std::sqrt(k * k + 4.0 * gamma * gamma)) / 2.0;
    }
    return gamma * gamma / (2.0 * delta - s2);
}

DerivedConstants derived_constants(const ValidatedModel& model, double theta, double alpha) {
    const double upper = theta_upper_bound(model);
    if (!(theta >= 1.0 && theta < upper)) {
        std::ostringstream os;
        os << "theta = " << theta << " outside [1, " << upper << ")";
        throw Error(ErrorCode::ThetaOutOfRange, os.str());
    }

    const std::size_t m = model.regime_count();
    std::vector<double> birth(m), beta(m), gamma(m), rho(m), d(m), mu(m), bigM(m), bigW(m), bigC(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = model.regime(i);
        const double s2 = r.sigma * r.sigma;
        birth[i] = r.p;
        beta[i] = theta * (r.delta + (1.0 - theta) * s2 / 2.0);
        gamma[i] = r.p / (r.a * std::numbers::e);
        rho[i] = s2 > 0.0 ? r.delta / s2 : std::numeric_limits<double>::infinity();
        d[i] = r.delta + s2 / 2.0;
        mu[i] = 2.0 * r.delta - r.p - s2;
        bigC[i] = log_growth_constant(r.delta, r.sigma, gamma[i]);
    }

    DerivedConstants dc;
    dc.theta = theta;
    dc.alpha = alpha;
    dc.beta = RegimeVector(beta);
    if (!(alpha > 0.0 && alpha < dc.beta.hat)) {
        std::ostringstream os;
        os << "alpha = " << alpha << " outside (0, " << dc.beta.hat << ")";
        throw Error(ErrorCode::AlphaOutOfRange, os.str());
    }

    for (std::size_t i = 0; i < m; ++i) {
        if (gamma[i] == 0.0) {
            bigM[i] = 0.0;
            bigW[i] = 0.0;
        } else if (theta == 1.0) {
            bigM[i] = gamma[i];
            bigW[i] = gamma[i];
        } else {
            const double xm = (theta - 1.0) * gamma[i] / beta[i];
            const double xw = (theta - 1.0) * gamma[i] / (beta[i] - alpha);
            bigM[i] = gamma[i] * std::pow(xm, theta - 1.0);
            bigW[i] = gamma[i] * std::pow(xw, theta - 1.0);
        }
    }

    dc.p = RegimeVector(std::move(birth));
    dc.gamma = RegimeVector(std::move(gamma));
    dc.rho = RegimeVector(std::move(rho));
    dc.d = RegimeVector(std::move(d));
    dc.mu = RegimeVector(std::move(mu));
    dc.bigM = RegimeVector(std::move(bigM));
    dc.bigW = RegimeVector(std::move(bigW));
    dc.bigC = RegimeVector(std::move(bigC));
    return dc;
}

}  // namespace nbf
