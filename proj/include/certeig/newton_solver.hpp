#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "certeig/dense.hpp"
#include "certeig/eigen_iterate.hpp"
#include "certeig/linear_operator.hpp"

namespace certeig {

// Second row of the Jacobian of R(u, nu) = (u - nu C u, 1 - |Cu|^2/g^2).
// exact: the derivative -(2/g^2) <Cu, C .>. unscaled: -<Cu, .>, which costs quadratic convergence.
enum class JacobianForm { exact, unscaled };

struct Residual {
    StateField r1;
    double r2 = 0.0;
    double norm = 0.0;   // product norm of the computed residual
    double bound = 0.0;  // bound on the error of the computed residual
    StateField cu;       // the computed C u
};

Residual residual_R(const CertifiedOperator& c, const EigenIterate& it, double eta);

struct Direction {
    StateField u;
    double nu = 0.0;
};

// DR at a base point, with f = C u_base cached. The constraint functional is <h, .> where
// h = (2/g^2) C* f (exact) or h = f (unscaled).
class Linearization {
public:
    Linearization(const CertifiedOperator& c, const EigenIterate& base, double eta,
                  JacobianForm form = JacobianForm::exact);
    Linearization(const CertifiedOperator& c, const EigenIterate& base, StateField f, double eta,
                  JacobianForm form = JacobianForm::exact);

    Direction apply(const Direction& d, double eta) const;
    Direction apply_adjoint(const Direction& r, double eta) const;

    const StateField& f() const { return f_; }
    const StateField& h() const { return h_; }

private:
    const CertifiedOperator& c_;
    double lambda_;
    StateField f_;
    StateField h_;
};

Direction apply_DR(const CertifiedOperator& c, const EigenIterate& base, const Direction& dir, double eta,
                   JacobianForm form = JacobianForm::exact);

struct DescentOptions {
    double beta_hat = 1.0;         // estimate of |DR^-1|
    double inner_fraction = 0.05;  // inner applies use inner_fraction * eta_n / beta_hat, over the amplification
    double norm_bound = 0.0;       // bound on |C|; 0 estimates it from |Cu| / |u|
    std::size_t max_iterations = 20000;
    std::size_t stall_window = 20;
    double stall_reduction = 1e-3;
    JacobianForm form = JacobianForm::exact;
};

struct DescentResult {
    Direction delta;
    double achieved_residual = 0.0;  // computed sqrt(2Q) plus the effect of inexact applies
    std::size_t iterations = 0;
    std::uint64_t c_applications = 0;
    std::vector<double> q_history;
};

// Minimizes the affine least-squares functional of the Newton system by projected steepest
// descent with exact line search; the constraint <h, w> = s is kept exactly.
DescentResult newton_update_descent(const CertifiedOperator& c, const EigenIterate& it, double eta_n,
                                    const DescentOptions& options = {});

struct OracleUpdate {
    Direction delta;        // dense saddle solve
    Direction elimination;  // block elimination through M^-1 C u
    bool perturbed = false; // lambda was nudged off a singular M
    double shift_condition = 0.0;  // reciprocal condition estimate of M
};

OracleUpdate newton_update_oracle(const DenseOperator& a, const EigenIterate& it,
                                  JacobianForm form = JacobianForm::exact);

struct QuadraticSchedule {
    double omega = 0.0;
    double beta_bar = 0.0;
    double gamma = 0.0;
};

struct LinearSchedule {
    double omega = 0.0;
    double zeta = 0.5;
};

// Linear until the error estimate drops below switch_below, then quadratic.
struct HybridSchedule {
    LinearSchedule linear;
    QuadraticSchedule quadratic;
    double switch_below = 0.0;
};

using ToleranceSchedule = std::variant<QuadraticSchedule, LinearSchedule, HybridSchedule>;

void validate(const ToleranceSchedule& schedule);
double schedule_eta(const ToleranceSchedule& schedule, double e_hat);

enum class UpdateBackend { descent, oracle };

struct NewtonRow {
    std::size_t step = 0;
    double lambda = 0.0;
    double residual_norm = 0.0;
    double residual_bound = 0.0;
    double error_estimate = 0.0;  // beta_hat (|R| + bound)
    double eta = 0.0;             // tolerance handed to the update (0 on the final row)
    std::size_t descent_iterations = 0;
    std::uint64_t c_applications = 0;
    double update_norm = 0.0;
    double oracle_error = std::numeric_limits<double>::quiet_NaN();
    bool eta_floored = false;  // the schedule asked for less than eta_floor * target
};

struct NewtonTrace {
    std::vector<NewtonRow> rows;
    std::vector<EigenIterate> iterates;  // the iterate of each row
    EigenIterate final_iterate;
    bool converged = false;
};

struct NewtonOptions {
    double beta_hat = 1.0;
    double residual_fraction = 0.1;  // residual applies at residual_fraction * target / (beta_hat max(1.5, |lambda|))
    // Updates are never requested more accurately than eta_floor * target: the final ehat is
    // about eta of the last update, and tolerances far below it only fight round-off.
    double eta_floor = 0.25;
    std::size_t max_steps = 60;
    DescentOptions descent;
    const DenseOperator* dense = nullptr;  // required by the oracle backend
    std::function<double(const EigenIterate&)> oracle_error;
    // Replaces the estimate fed to the schedule (tests feed the true error).
    std::function<double(const EigenIterate&)> schedule_error;
};

NewtonTrace run_newton(const CertifiedOperator& c, const EigenIterate& init, const ToleranceSchedule& schedule,
                       double target, UpdateBackend backend, const NewtonOptions& options,
                       const std::function<void(const NewtonRow&)>& on_row = {});

}  // namespace certeig
