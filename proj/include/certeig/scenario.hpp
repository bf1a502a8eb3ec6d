#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "certeig/phase_model.hpp"

namespace certeig {

struct NewtonConfig {
    std::string schedule = "hybrid";  // quad | lin | hybrid
    double zeta = 0.5;
    double target = 1e-8;
    std::string backend = "descent";  // descent | oracle
};

struct PowerConfig {
    std::size_t warmup = 20;  // power steps before Newton when no budget is available
    double c_pow = 0.1;
    std::size_t max_steps = 2000;
};

struct Scenario {
    std::string name;
    PhaseGrid grid;
    OpticalField optics;
    NewtonConfig newton;
    PowerConfig power;
};

// JSON scenario: {grid: {...}, optics: {sigma, kappa, phi}, newton: {...}, power: {...}}.
// Table paths are resolved relative to base_dir.
Scenario parse_scenario(std::string_view json_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

// "const", "het" and "ref": the scenarios shipped in scenarios/.
Scenario builtin_scenario(std::string_view name);

}  // namespace certeig
