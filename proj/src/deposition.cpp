#include "lobsim/deposition.hpp"

#include <string>

#include "lobsim/errors.hpp"

namespace lobsim {

void MechanismConfig::validate() const {
    if (mechanism < 1 || mechanism > 3) {
        throw ConfigError("mechanism must be 1, 2, or 3 (got " + std::to_string(mechanism) + ")");
    }
    if (mechanism != 3 && !(pi > 0.0 && pi < 0.5)) {
        throw ConfigError("pi must lie in (0, 0.5) so deposition outpaces removal");
    }
    if (mechanism == 2) {
        if (k < 2) {
            throw ConfigError("k must be at least 2 (got " + std::to_string(k) + ")");
        }
    } else if (L < 1) {
        throw ConfigError("L must be at least 1 (got " + std::to_string(L) + ")");
    }
    if (tau < 1) {
        throw ConfigError("tau must be at least 1 (got " + std::to_string(tau) + ")");
    }
    if (steps < 1) {
        throw ConfigError("steps must be at least 1 (got " + std::to_string(steps) + ")");
    }
    if (warmup < 0) {
        throw ConfigError("warmup must be nonnegative (got " + std::to_string(warmup) + ")");
    }
}

MechanismConfig MechanismConfig::defaults_for(int mechanism) {
    MechanismConfig c;
    c.mechanism = mechanism;
    switch (mechanism) {
        case 1: c.L = 200; break;
        case 2: c.k = 4; break;
        case 3: c.L = 100; break;
        default: break;  // validate() rejects it later
    }
    return c;
}

} // namespace lobsim
