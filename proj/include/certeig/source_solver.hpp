#pragma once

#include <cstddef>

#include "certeig/linear_operator.hpp"
#include "certeig/transport_ops.hpp"

namespace certeig {

// Split of a tolerance for C f = B^-1 (F f) between an inexact fission application (eta_fission)
// and the source solve (eta_source), such that |B^-1| eta_fission + eta_source <= eta.
struct ApplyBudget {
    double eta_fission = 0.0;
    double eta_source = 0.0;
};

ApplyBudget split_budget(double eta, double b_inverse_norm, double fission_share = 0.0);

// Iteration cap for a fixed point with contraction rho whose first increment is first_increment.
std::size_t iteration_cap(double eta, double rho, double first_increment);

// Certified applications of B^-1, C = B^-1 F and the sigma-adjoint C*, all by contractive
// fixed-point iteration with the a-posteriori stopping test rho/(1-rho) |u_{k+1} - u_k| <= eta.
class SourceSolver {
public:
    explicit SourceSolver(const OperatorSet& ops);

    const OperatorSet& operators() const { return ops_; }
    double rho() const { return rho_; }
    // Schur-test bound on |F| in the sigma-norm.
    double fission_norm_bound() const { return fission_norm_; }

    CertifiedResult solve_B(const StateField& q, double eta) const;
    CertifiedResult apply_C(const StateField& f, double eta) const;
    CertifiedResult apply_C_adjoint(const StateField& f, double eta) const;

private:
    template <class Step>
    CertifiedResult fixed_point(StateField u, Step step, double eta) const;

    const OperatorSet& ops_;
    double rho_;
    double fission_norm_;
    StateField sigma_;
};

// C = B^-1 F on the transport grid as a CertifiedOperator.
class TransportC final : public CertifiedOperator {
public:
    explicit TransportC(const SourceSolver& solver) : solver_(solver) {}

    std::size_t dim() const override { return solver_.operators().size(); }
    const WeightedSpace& space() const override { return solver_.operators().space(); }
    CertifiedResult apply(const StateField& x, double eta) const override;
    CertifiedResult apply_adjoint(const StateField& x, double eta) const override;
    using CertifiedOperator::apply;

    const SourceSolver& solver() const { return solver_; }

private:
    const SourceSolver& solver_;
};

}  // namespace certeig
