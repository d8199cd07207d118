#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nbf/bounds.hpp"
#include "nbf/fixtures.hpp"
#include "support.hpp"

using namespace nbf;

namespace {

double kappa_residual(double kappa, double mu_hat, double vartheta, double tau) {
    return std::abs(kappa * vartheta * tau * std::exp(kappa * tau) + kappa - mu_hat);
}

TheoremBounds reference_bounds(double theta = 1.0) {
    const auto model = validate_model(fixtures::three_regime(), true);
    return compute_theorem_bounds(model, theta, default_alpha(model, theta), default_vartheta(model));
}

}  // namespace

TEST_CASE("x exp(-a x) bound") {
    CHECK(birth_term_bound(1.0) == doctest::Approx(1.0 / std::numbers::e).epsilon(1e-15));
    CHECK(1.0 * std::exp(-1.0) == doctest::Approx(birth_term_bound(1.0)).epsilon(1e-15));
    CHECK(birth_term_bound(0.4) == doctest::Approx(0.9196986029286058).epsilon(1e-15));
    CHECK_THROWS_WITH_AS((void)birth_term_bound(0.0), doctest::Contains("NonPositiveA"), Error);
    CHECK_THROWS_AS((void)birth_term_bound(-1.0), Error);
}

TEST_CASE("rational quadratic bound") {
    CHECK(quadratic_ratio_bound(0.0, 2.0) == 1.0);
    CHECK(quadratic_ratio_bound(-1.0, 2.0) == 1.0);
    CHECK(quadratic_ratio_bound(3.0, 4.0) == 4.0);
    CHECK_THROWS_WITH_AS((void)quadratic_ratio_bound(1.0, 0.0), doctest::Contains("NonPositiveB"), Error);
}

TEST_CASE("randomized domination of both elementary bounds") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t bad1 = 0;
    std::size_t bad2 = 0;
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) {
        const double a = 1e-3 + 20.0 * unit(rng);
        const double x = 50.0 * unit(rng) / a;
        bad1 += x * std::exp(-a * x) > birth_term_bound(a) + 1e-12 ? 1 : 0;

        const double qa = 20.0 * unit(rng) - 10.0;
        const double qb = 1e-3 + 10.0 * unit(rng);
        const double y = std::tan(std::numbers::pi * (unit(rng) - 0.5));
        bad2 += (qa * y * y + qb * y) / (1.0 + y * y) > quadratic_ratio_bound(qa, qb) + 1e-12 ? 1 : 0;
    }
    CHECK(bad1 == 0);
    CHECK(bad2 == 0);
}

TEST_CASE("decay rate root") {
    const double k1 = kappa_root(0.8, 0.5, 1.0);
    CHECK(k1 == doctest::Approx(0.44865608789252645).epsilon(1e-12));
    CHECK(kappa_residual(k1, 0.8, 0.5, 1.0) < 1e-12);

    // mu-hat = 1, vartheta = 1, tau = 1: the root is 0.40106 (not 0.4806, whose residual is 0.27)
    const double k2 = kappa_root(1.0, 1.0, 1.0);
    CHECK(k2 == doctest::Approx(0.40105813754154704).epsilon(1e-12));
    CHECK(kappa_residual(k2, 1.0, 1.0, 1.0) < 1e-12);
    CHECK(kappa_residual(0.4806, 1.0, 1.0, 1.0) > 0.1);

    const double k3 = kappa_root(0.8, 0.42, 1.0);
    CHECK(k3 == doctest::Approx(0.47710276652975474).epsilon(1e-12));

    CHECK(kappa_root(0.7, 3.0, 0.0) == 0.7);
}

TEST_CASE("decay rate root preconditions") {
    CHECK_THROWS_WITH_AS((void)kappa_root(0.0, 1.0, 1.0), doctest::Contains("NonPositiveMu"), Error);
    CHECK_THROWS_AS((void)kappa_root(-1.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS((void)kappa_root(1.0, 0.0, 1.0), Error);
    const double same[] = {1.0, 1.0, 1.0};
    CHECK(kappa_root(0.8, 0.5, same) == kappa_root(0.8, 0.5, 1.0));
    const double mixed[] = {1.0, 0.5, 1.0};
    CHECK_THROWS_WITH_AS((void)kappa_root(0.8, 0.5, mixed), doctest::Contains("NonUniformDelay"), Error);
}

TEST_CASE("decay rate root is accurate and monotone on random inputs") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 5000; ++k) {
        const double mu = 1e-3 + 5.0 * unit(rng);
        const double v = 1e-3 + 5.0 * unit(rng);
        const double tau = 3.0 * unit(rng);
        const double kappa = kappa_root(mu, v, tau);
        CHECK(kappa > 0.0);
        CHECK(kappa <= mu);
        CHECK(kappa_residual(kappa, mu, v, tau) < 1e-12);
        if (tau > 0.0) {
            CHECK(kappa_root(mu, v * 1.1, tau) < kappa);
            CHECK(kappa_root(mu, v, tau * 1.1) < kappa);
        }
    }
}

TEST_CASE("reference model bounds") {
    const auto tb = reference_bounds();
    CHECK(tb.moment_bound_Mhat == doctest::Approx(3.6787944117144232).epsilon(1e-14));
    CHECK(tb.lyap_lower_minmax == -8.5);
    CHECK(tb.lyap_upper_minmax == doctest::Approx(10.322852113053753 / 2.0).epsilon(1e-13));
    CHECK(std::abs(tb.lyap_lower + 4.1978) <= 1e-3);
    CHECK(tb.lyap_lower == doctest::Approx(-4.1978155339805825).epsilon(1e-13));
    CHECK(tb.lyap_upper == doctest::Approx(3.2640774736818656).epsilon(1e-13));
    CHECK(std::abs(tb.nstar - 1.1883) <= 1e-3);
    CHECK(tb.nstar == doctest::Approx(1.1883317787478796).epsilon(1e-13));
    CHECK(tb.lambda == doctest::Approx(0.54733009708737864).epsilon(1e-13));
    CHECK(tb.extinction_rate == doctest::Approx(4.1978155339805825).epsilon(1e-13));
    CHECK(tb.lyap_lower <= tb.lyap_upper);
    CHECK_FALSE(tb.kappa.has_value());  // a differs between regimes
    CHECK_FALSE(tb.kappa_note.empty());
}

TEST_CASE("decay model carries a decay rate") {
    const auto model = validate_model(fixtures::three_regime_decay(), true);
    const auto tb = compute_theorem_bounds(model, 1.0, default_alpha(model, 1.0), 0.42);
    REQUIRE(tb.kappa.has_value());
    CHECK(tb.mu_hat == doctest::Approx(0.8));
    CHECK(*tb.kappa == doctest::Approx(0.47710276652975474).epsilon(1e-12));
    CHECK(default_vartheta(model) == doctest::Approx(0.42));

    // vartheta must exceed the largest birth rate
    const auto low = compute_theorem_bounds(model, 1.0, default_alpha(model, 1.0), 0.3);
    CHECK_FALSE(low.kappa.has_value());
}

TEST_CASE("zero birth rates") {
    const auto model = validate_model(fixtures::three_regime_no_birth(), true);
    const auto tb = compute_theorem_bounds(model, 1.0, default_alpha(model, 1.0), default_vartheta(model));
    CHECK(tb.all_birth_zero);
    CHECK(tb.nstar == 0.0);
    CHECK(tb.moment_bound_Mhat == 0.0);
    CHECK(tb.lambda == doctest::Approx(4.1978155339805825).epsilon(1e-13));
}

TEST_CASE("extinction rate vanishes when births equal d") {
    auto spec = fixtures::three_regime();
    for (auto& r : spec.regimes) {
        r.p = r.delta + 0.5 * r.sigma * r.sigma;
    }
    const auto model = validate_model(spec, true);
    const auto dc = derived_constants(model, 1.0, default_alpha(model, 1.0));
    CHECK(std::abs(lambda_rate(dc, stationary_distribution(model.generator()))) < 1e-14);
}

TEST_CASE("single regime reductions") {
    ModelSpec spec;
    spec.regimes = {{.delta = 1.0, .p = std::numbers::e, .tau = 0.5, .a = 1.0, .sigma = 0.0}};
    spec.generator = GeneratorMatrix(std::vector<std::vector<double>>{{0.0}});
    spec.history = InitialHistory::constant(1.0, 0.5);
    const auto model = validate_model(spec, true);
    const auto tb = compute_theorem_bounds(model, 1.0, 0.5, 3.0);
    CHECK(tb.nstar == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tb.pi.pi == std::vector<double>{1.0});
    CHECK(tb.lyap_lower == tb.lyap_lower_minmax);
    CHECK(tb.lyap_upper == tb.lyap_upper_minmax);
    CHECK(tb.time_avg_bound_pi == tb.time_avg_bound_What_over_alpha);

    spec.regimes[0].p = 0.0;
    const auto still = validate_model(spec, true);
    CHECK(minmax_bounds(derived_constants(still, 1.0, 0.5)).moment_bound == 0.0);
}

TEST_CASE("single regime reductions hold on random models") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 200; ++k) {
        const auto model = validate_model(testing::random_model(rng, 1), true);
        const double theta = 1.0 + 0.5 * (std::min(theta_upper_bound(model), 3.0) - 1.0);
        const auto tb = compute_theorem_bounds(model, theta, default_alpha(model, theta), 1.0);
        CHECK(tb.lyap_lower == tb.lyap_lower_minmax);
        CHECK(tb.lyap_upper == tb.lyap_upper_minmax);
        CHECK(tb.time_avg_bound_pi == tb.time_avg_bound_What_over_alpha);
        CHECK(tb.nstar == tb.constants.gamma[0] / tb.constants.d[0]);
    }
}

TEST_CASE("lower Lyapunov bound never exceeds the upper one") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 500; ++k) {
        const auto model = validate_model(testing::random_model(rng, 2 + k % 5), true);
        const auto tb = compute_theorem_bounds(model, 1.0, default_alpha(model, 1.0), default_vartheta(model));
        CHECK(tb.lyap_lower <= tb.lyap_upper);
        CHECK(tb.lyap_lower_minmax <= tb.lyap_upper_minmax);
        CHECK(tb.nstar >= 0.0);
        if (tb.kappa) {
            CHECK(*tb.kappa > 0.0);
            CHECK(*tb.kappa <= tb.mu_hat);
        }
    }
}

TEST_CASE("N* does not depend on the regime labels") {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 100; ++k) {
        auto spec = testing::random_model(rng, 4);
        std::vector<std::size_t> perm(4);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        ModelSpec relabeled = spec;
        const auto q = spec.generator.rows();
        auto pq = q;
        for (std::size_t i = 0; i < 4; ++i) {
            relabeled.regimes[i] = spec.regimes[perm[i]];
            for (std::size_t j = 0; j < 4; ++j) {
                pq[i][j] = q[perm[i]][perm[j]];
            }
        }
        relabeled.generator = GeneratorMatrix(pq);
        const auto a = validate_model(spec, true);
        const auto b = validate_model(relabeled, true);
        const auto pa = stationary_distribution(a.generator());
        const auto pb = stationary_distribution(b.generator());
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(pb[i] == doctest::Approx(pa[perm[i]]).epsilon(1e-12));
        }
        const double na = nstar(derived_constants(a, 1.0, default_alpha(a, 1.0)), pa);
        const double nb = nstar(derived_constants(b, 1.0, default_alpha(b, 1.0)), pb);
        CHECK(nb == doctest::Approx(na).epsilon(1e-12));
    }
}

TEST_CASE("bounds need an irreducible chain") {
    auto spec = fixtures::three_regime();
    spec.generator = GeneratorMatrix({{-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}, {0.0, 0.0, 0.0}});
    const auto model = validate_model(spec);
    CHECK_THROWS_WITH_AS((void)compute_theorem_bounds(model, 1.0, 0.5, 8.4), doctest::Contains("Reducible"), Error);
}

TEST_CASE("min/max bounds check their preconditions") {
    auto dc = reference_bounds().constants;
    dc.alpha = 5.0;
    CHECK_THROWS_WITH_AS((void)minmax_bounds(dc), doctest::Contains("PreconditionViolation"), Error);
}

TEST_CASE("reference cross-check flags the entries that disagree") {
    const auto model = validate_model(fixtures::three_regime(), true);
    const auto rows = reference_cross_check(model);
    REQUIRE_FALSE(rows.empty());
    auto find = [&](const std::string& q) {
        for (const auto& r : rows) {
            if (r.quantity == q) {
                return r;
            }
        }
        FAIL("missing row " << q);
        return CrossCheckRow{};
    };
    CHECK(find("pi_1").agrees);
    CHECK(find("d_3").agrees);
    CHECK(find("C_3").agrees);
    CHECK(find("N*").agrees);
    CHECK_FALSE(find("C_1").agrees);
    CHECK(find("C_1").computed == doctest::Approx(7.7334).epsilon(1e-4));
    CHECK_FALSE(find("C_2").agrees);
    CHECK(find("C_2").computed == doctest::Approx(4.8123).epsilon(1e-4));
    CHECK(reference_cross_check(validate_model(fixtures::single_regime())).empty());
}
