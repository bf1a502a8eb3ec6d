#include "certeig/source_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "certeig/errors.hpp"

namespace certeig {

ApplyBudget split_budget(double eta, double b_inverse_norm, double fission_share)
{
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::InvalidOptics, "tolerance must be positive");
    }
    fission_share = std::clamp(fission_share, 0.0, 1.0);
    ApplyBudget b;
    b.eta_fission = b_inverse_norm > 0.0 ? fission_share * eta / b_inverse_norm : 0.0;
    b.eta_source = eta - b_inverse_norm * b.eta_fission;
    return b;
}

std::size_t iteration_cap(double eta, double rho, double first_increment)
{
    if (rho <= 0.0 || first_increment <= 0.0) {
        return 11;
    }
    const double steps = std::ceil(std::log(eta * (1.0 - rho) / first_increment) / std::log(rho));
    return static_cast<std::size_t>(std::max(steps, 1.0)) + 10;
}

namespace {

double fission_schur_bound(const OperatorSet& ops)
{
    const PhaseGrid& grid = ops.grid();
    const OpticalField& optics = ops.optics();
    const std::size_t n = grid.n_ordinates();
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        // G(k, k') = sqrt(w_k s_k) * w_k' phi(k', k) / sqrt(w_k' s_k'): the block of F in the
        // cell, symmetrically scaled to Euclidean coordinates.
        std::vector<double> row(n, 0.0);
        std::vector<double> col(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t kp = 0; kp < n; ++kp) {
                const double g = std::sqrt(grid.weight(k) * optics.sigma(i, k)) * grid.weight(kp) *
                                 optics.phi(i, kp, k) / std::sqrt(grid.weight(kp) * optics.sigma(i, kp));
                row[k] += g;
                col[kp] += g;
            }
        }
        const double r = *std::max_element(row.begin(), row.end());
        const double c = *std::max_element(col.begin(), col.end());
        worst = std::max(worst, std::sqrt(r * c));
    }
    return worst;
}

}  // namespace

SourceSolver::SourceSolver(const OperatorSet& ops)
    : ops_(ops), rho_(ops.assumptions().rho), fission_norm_(fission_schur_bound(ops))
{
    if (!(rho_ < 1.0)) {
        throw Error(ErrorKind::NotContractive, "rho = " + std::to_string(rho_) + " >= 1");
    }
    sigma_ = Eigen::Map<const Eigen::VectorXd>(ops.optics().sigma_values().data(),
                                               static_cast<Eigen::Index>(ops.size()));
}

template <class Step>
CertifiedResult SourceSolver::fixed_point(StateField u, Step step, double eta) const
{
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::InvalidOptics, "tolerance must be positive");
    }
    const WeightedSpace& space = ops_.space();
    const double factor = rho_ / (1.0 - rho_);
    std::size_t cap = 0;
    CertifiedResult out;
    for (std::size_t k = 1;; ++k) {
        StateField next = step(u);
        const double increment = space.norm(StateField(next - u));
        if (k == 1) {
            cap = iteration_cap(eta, rho_, increment);
        }
        u = std::move(next);
        out.bound = factor * increment;
        out.iterations = k;
        if (out.bound <= eta) {
            break;
        }
        if (k >= cap) {
            throw Error(ErrorKind::IterationCap, "fixed point did not reach " + std::to_string(eta) + " in " +
                                                     std::to_string(cap) + " iterations");
        }
    }
    out.value = std::move(u);
    return out;
}

CertifiedResult SourceSolver::solve_B(const StateField& q, double eta) const
{
    auto step = [&](const StateField& u) { return ops_.solve_T(StateField(ops_.apply_K(u) + q)); };
    return fixed_point(ops_.solve_T(q), step, eta);
}

CertifiedResult SourceSolver::apply_C(const StateField& f, double eta) const
{
    const ApplyBudget budget = split_budget(eta, 0.0);
    CertifiedResult out = solve_B(ops_.apply_F(f), budget.eta_source);
    out.c_applications = 1;
    return out;
}

CertifiedResult SourceSolver::apply_C_adjoint(const StateField& f, double eta) const
{
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::InvalidOptics, "tolerance must be positive");
    }
    // C* f = S^-1 F^T y with B^T y = S f, S = diag(sigma), transposes in the plain measure.
    // The map y -> T^-T (K^T y + S f) is a transport fixed point with reversed directions and
    // transposed kernel, so it contracts with the same rho. An error e in y costs at most
    // |F|_sigma / sigma_min * |e| in the result.
    const double sigma_min = sigma_.minCoeff();
    if (fission_norm_ == 0.0) {
        return {StateField::Zero(f.size()), 0.0, 0, 1};
    }
    const StateField rhs = sigma_.cwiseProduct(f);
    auto step = [&](const StateField& y) { return ops_.solve_T_transpose(StateField(ops_.apply_K_transpose(y) + rhs)); };
    const double eta_y = eta * sigma_min / fission_norm_;
    CertifiedResult y = fixed_point(ops_.solve_T_transpose(rhs), step, eta_y);
    CertifiedResult out;
    out.value = ops_.apply_F_transpose(y.value).cwiseQuotient(sigma_);
    out.bound = y.bound * fission_norm_ / sigma_min;
    out.iterations = y.iterations;
    out.c_applications = 1;
    return out;
}

CertifiedResult TransportC::apply(const StateField& x, double eta) const
{
    count();
    return solver_.apply_C(x, eta);
}

CertifiedResult TransportC::apply_adjoint(const StateField& x, double eta) const
{
    count();
    return solver_.apply_C_adjoint(x, eta);
}

}  // namespace certeig
