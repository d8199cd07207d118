#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nbf/error.hpp"

namespace nbf {

/// Parameters of one regime of the switched blowflies equation
///   dX = [-delta X + p X(t-tau) exp(-a X(t-tau))] dt + sigma X dB.
struct RegimeParams {
    double delta = 1.0;  ///< adult death rate (1/time), > 0
    double p = 0.0;      ///< maximum egg production rate (1/time), >= 0
    double tau = 0.0;    ///< generation delay (time), >= 0
    double a = 1.0;      ///< inverse of the size of maximal reproduction, > 0
    double sigma = 0.0;  ///< noise intensity (1/sqrt(time)), >= 0

    bool operator==(const RegimeParams&) const = default;
};

/// Dense m x m Markov generator, row-major. Construction only checks shape;
/// the generator properties are checked by validate_model / check_generator.
class GeneratorMatrix {
public:
    GeneratorMatrix() = default;
    explicit GeneratorMatrix(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] std::size_t size() const noexcept { return m_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return q_[i * m_ + j]; }
    [[nodiscard]] double exit_rate(std::size_t i) const { return -q_[i * m_ + i]; }
    [[nodiscard]] std::vector<std::vector<double>> rows() const;

    bool operator==(const GeneratorMatrix&) const = default;

private:
    std::size_t m_ = 0;
    std::vector<double> q_;
};

struct HistorySample {
    double time;
    double value;

    bool operator==(const HistorySample&) const = default;
};

/// Initial segment phi on [-tau_max, 0]: either a constant or a piecewise-linear
/// interpolant through samples.
class InitialHistory {
public:
    InitialHistory() = default;

    static InitialHistory constant(double value, double tau_max);
    static InitialHistory from_samples(std::vector<HistorySample> samples, double tau_max);

    [[nodiscard]] bool is_constant() const noexcept { return constant_; }
    [[nodiscard]] double tau_max() const noexcept { return tau_max_; }
    [[nodiscard]] std::span<const HistorySample> samples() const noexcept { return samples_; }

    /// phi(t) for t in [-tau_max, 0]; samples are held flat outside their span.
    [[nodiscard]] double operator()(double t) const;

    bool operator==(const InitialHistory&) const = default;

private:
    bool constant_ = true;
    double tau_max_ = 0.0;
    std::vector<HistorySample> samples_;
};

/// Birth term G(x, i) evaluated at the delayed state. The default is the
/// Nicholson term p_i x exp(-a_i x).
using BirthFunction = std::function<double(double delayed_x, const RegimeParams& regime)>;

[[nodiscard]] double nicholson_birth(double delayed_x, const RegimeParams& regime) noexcept;

struct ModelSpec {
    std::vector<RegimeParams> regimes;
    GeneratorMatrix generator;
    InitialHistory history;
    std::size_t initial_regime = 0;  ///< 0-based
    BirthFunction birth;             ///< empty selects nicholson_birth
};

struct Violation {
    ErrorCode code;
    std::string message;
};

/// Thrown by validate_model; carries every violation found, not only the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

class ValidatedModel;

[[nodiscard]] std::vector<Violation> check_generator(const GeneratorMatrix& q);
[[nodiscard]] std::vector<Violation> check_model(const ModelSpec& spec, bool require_irreducible = false);
[[nodiscard]] ValidatedModel validate_model(ModelSpec spec, bool require_irreducible = false);

/// A ModelSpec that passed validation. Immutable.
class ValidatedModel {
public:
    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::size_t regime_count() const noexcept { return spec_.regimes.size(); }
    [[nodiscard]] const RegimeParams& regime(std::size_t i) const { return spec_.regimes[i]; }
    [[nodiscard]] const GeneratorMatrix& generator() const noexcept { return spec_.generator; }
    [[nodiscard]] const InitialHistory& history() const noexcept { return spec_.history; }
    [[nodiscard]] std::size_t initial_regime() const noexcept { return spec_.initial_regime; }
    [[nodiscard]] double tau_max() const noexcept { return spec_.history.tau_max(); }
    [[nodiscard]] bool irreducible() const noexcept { return irreducible_; }

    [[nodiscard]] double birth(double delayed_x, std::size_t i) const {
        const auto& r = spec_.regimes[i];
        return spec_.birth ? spec_.birth(delayed_x, r) : nicholson_birth(delayed_x, r);
    }

private:
    friend ValidatedModel validate_model(ModelSpec, bool);
    ValidatedModel(ModelSpec spec, bool irreducible) : spec_(std::move(spec)), irreducible_(irreducible) {}

    ModelSpec spec_;
    bool irreducible_ = false;
};

/// Per-regime values with their min (hat) and max (check) aggregates.
struct RegimeVector {
    std::vector<double> values;
    double hat = 0.0;
    double check = 0.0;

    RegimeVector() = default;
    explicit RegimeVector(std::vector<double> v);

    [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

struct DerivedConstants {
    double theta = 1.0;
    double alpha = 0.0;
    RegimeVector p;      ///< birth rates, carried for the extinction rate
    RegimeVector beta;   ///< theta (delta + (1 - theta) sigma^2 / 2)
    RegimeVector gamma;  ///< p / (a e)
    RegimeVector rho;    ///< delta / sigma^2, +inf when sigma = 0
    RegimeVector d;      ///< delta + sigma^2 / 2
    RegimeVector mu;     ///< 2 delta - p - sigma^2
    RegimeVector bigM;   ///< sup_x>=0 of theta gamma x^(theta-1) - beta x^theta
    RegimeVector bigW;   ///< sup_x>=0 of (alpha - beta) x^theta + theta gamma x^(theta-1)
    RegimeVector bigC;   ///< two-branch bound on the log-moment drift
};

/// 1 + 2 min_i(delta_i / sigma_i^2); +inf when every sigma_i is zero.
[[nodiscard]] double theta_upper_bound(const ValidatedModel& model);

/// Default alpha = beta-hat / 2 for the given theta.
[[nodiscard]] double default_alpha(const ValidatedModel& model, double theta);

/// Fills every derived constant. Throws ThetaOutOfRange unless
/// theta in [1, theta_upper_bound) and AlphaOutOfRange unless 0 < alpha < beta-hat.
///
/// For theta > 1 the suprema are attained at x* = (theta-1) gamma / beta (M) and
/// x* = (theta-1) gamma / (beta - alpha) (W), both evaluating to gamma x*^(theta-1).
/// For theta = 1 the objective gamma - beta x decreases on [0, inf), so the
/// supremum gamma sits on the boundary x = 0.
[[nodiscard]] DerivedConstants derived_constants(const ValidatedModel& model, double theta, double alpha);

/// Single regime C_i from the two-branch formula (split at delta vs sigma^2/2).
[[nodiscard]] double log_growth_constant(double delta, double sigma, double gamma) noexcept;

}  // namespace nbf
