#include "nbf/fixtures.hpp"

namespace nbf::fixtures {

namespace {

ModelSpec three_regime_with(const std::vector<double>& p, const std::vector<double>& a,
                            const std::vector<double>& sigma) {
    const std::vector<double> delta = {2.0, 1.0, 4.0};
    ModelSpec spec;
    for (std::size_t i = 0; i < 3; ++i) {
        spec.regimes.push_back({.delta = delta[i], .p = p[i], .tau = 1.0, .a = a[i], .sigma = sigma[i]});
    }
    spec.generator = GeneratorMatrix({{-10.0, 4.0, 6.0}, {2.0, -3.0, 1.0}, {3.0, 5.0, -8.0}});
    spec.history = InitialHistory::constant(1.0, 1.0);
    spec.initial_regime = 2;
    return spec;
}

}  // namespace

ModelSpec three_regime() {
    return three_regime_with({4.0, 2.0, 8.0}, {0.4, 0.2, 0.3}, {1.5, 2.0, 3.0});
}

ModelSpec three_regime_decay() {
    return three_regime_with({0.2, 0.2, 0.4}, {0.4, 0.4, 0.4}, {1.5, 1.0, 2.5});
}

ModelSpec three_regime_no_birth() {
    return three_regime_with({0.0, 0.0, 0.0}, {0.4, 0.2, 0.3}, {1.5, 2.0, 3.0});
}

ModelSpec single_regime() {
    ModelSpec spec;
    spec.regimes.push_back({.delta = 1.0, .p = 5.0, .tau = 1.0, .a = 1.0, .sigma = 2.0});
    spec.generator = GeneratorMatrix(std::vector<std::vector<double>>{{0.0}});
    spec.history = InitialHistory::constant(1.0, 1.0);
    spec.initial_regime = 0;
    return spec;
}

bool is_three_regime(const ModelSpec& spec) {
    const auto ref = three_regime();
    return spec.regimes == ref.regimes && spec.generator == ref.generator;
}

}  // namespace nbf::fixtures
