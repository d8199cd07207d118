#pragma once

#include "nbf/model.hpp"

namespace nbf::fixtures {

/// Three-regime reference model: Q = [-10,4,6; 2,-3,1; 3,5,-8], delta = [2,1,4],
/// p = [4,2,8], tau = 1, a = [0.4,0.2,0.3], sigma = [1.5,2,3], phi = 1, r0 = 3.
[[nodiscard]] ModelSpec three_regime();

/// Same chain with p = [0.2,0.2,0.4], a = 0.4, sigma = [1.5,1,2.5]; mu-hat = 0.8 > 0
/// so second moments decay exponentially.
[[nodiscard]] ModelSpec three_regime_decay();

/// Three-regime model with every p_i = 0.
[[nodiscard]] ModelSpec three_regime_no_birth();

/// Non-switching model delta = 1, p = 5, tau = 1, a = 1, sigma = 2, phi = 1.
[[nodiscard]] ModelSpec single_regime();

/// True when spec has the parameters and generator of three_regime().
[[nodiscard]] bool is_three_regime(const ModelSpec& spec);

}  // namespace nbf::fixtures
