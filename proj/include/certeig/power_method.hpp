#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "certeig/linear_operator.hpp"

namespace certeig {

struct PowerStep {
    StateField next;
    double rayleigh = 0.0;
    double image_norm = 0.0;
    double apply_bound = 0.0;
};

// One normalized step: b = C a (to eta_apply), rayleigh = <b, a>, next = b / |b|.
PowerStep power_step(const CertifiedOperator& c, const StateField& a, double eta_apply);

struct PowerPolicy {
    double c_pow = 0.1;          // eta_n = c_pow * increment * |rayleigh|
    double fixed_eta = 0.0;      // > 0 overrides the proportional rule
    double initial_eta = 1e-3;   // tolerance of the first step
    double eta_floor = 1e-14;
    std::size_t max_steps = 1000;
    std::size_t stagnation_window = 10;
};

struct PowerRow {
    std::size_t step = 0;
    double rayleigh = 0.0;
    double increment = 0.0;  // |a_{n+1} - a_n|
    double eta_apply = 0.0;
    double distance_estimate = 0.0;
    std::uint64_t c_applications = 0;
};

struct PowerTrace {
    std::vector<PowerRow> rows;
    StateField initial;
    StateField final_iterate;
    std::vector<StateField> iterates;  // a_1, a_2, ... when recording is enabled
    bool converged = false;
};

// Runs until the increment-based distance estimate increment/(1 - q) is at most target.
// Throws Stagnation when increments do not decrease over stagnation_window steps.
PowerTrace run_power(const CertifiedOperator& c, const StateField& a0, double target, const PowerPolicy& policy = {},
                     bool record_iterates = false, const std::function<void(const PowerRow&)>& on_row = {});

struct NormInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// lo from the power iteration on C*C (each |C x| - eta is a valid lower bound); hi supplied by the
// caller, e.g. transport_norm_upper_bound.
NormInterval estimate_norm_C(const CertifiedOperator& c, double eta, std::size_t n_steps, double upper_bound,
                             const StateField* start = nullptr);

// M sqrt(sigma_max / sigma_min) / alpha.
double transport_norm_upper_bound(const AssumptionReport& report);

struct GapEstimate {
    double gap = 0.0;     // 1 - q_hat, clamped to [0, 1]
    double q_hat = 0.0;
    std::size_t used = 0; // increments entering the fit
    bool certified = false;
};

// Geometric least-squares fit of the iterate increments. Heuristic, never certified.
GapEstimate estimate_gap(const PowerTrace& trace);

}  // namespace certeig
