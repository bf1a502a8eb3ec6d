#include "certeig/transport_ops.hpp"

#include <string>

#include <Eigen/LU>

#include "certeig/errors.hpp"
#include "certeig/kernels.hpp"

namespace certeig {

OperatorSet::OperatorSet(PhaseGrid grid, OpticalField optics, ExecPolicy policy)
    : grid_(std::move(grid)),
      optics_(std::move(optics)),
      policy_(policy),
      report_(check_assumptions(grid_, optics_)),
      sigma_space_(make_space(grid_, optics_, Weighting::sigma)),
      plain_space_(make_space(grid_, optics_, Weighting::plain)),
      counters_(std::make_unique<Counters>())
{
    if (policy_.threads < 1) {
        policy_.threads = 1;
    }
    for (const auto& o : grid_.ordinates()) {
        mu_.push_back(o.mu);
        weight_.push_back(o.weight);
    }
    sigma_ = Eigen::Map<const Eigen::VectorXd>(optics_.sigma_values().data(),
                                               static_cast<Eigen::Index>(optics_.sigma_values().size()));
}

void OperatorSet::check(const StateField& u) const
{
    if (static_cast<std::size_t>(u.size()) != grid_.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    "field of size " + std::to_string(u.size()) + " on grid of size " + std::to_string(grid_.size()));
    }
}

void OperatorSet::check(const ComplexField& u) const
{
    if (static_cast<std::size_t>(u.size()) != grid_.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    "field of size " + std::to_string(u.size()) + " on grid of size " + std::to_string(grid_.size()));
    }
}

StateField OperatorSet::sweep(const StateField& q, bool transposed) const
{
    check(q);
    StateField out(q.size());
    const kernels::Layout g{grid_.n_cells(), grid_.n_ordinates(), grid_.cell_width(), mu_.data(), sigma_.data(),
                            weight_.data()};
    const auto dir = transposed ? kernels::Direction::transposed : kernels::Direction::forward;
    if (policy_.threads > 1) {
        kernels::parallel::sweep(g, q.data(), out.data(), dir, policy_.threads);
    } else {
        kernels::serial::sweep(g, q.data(), out.data(), dir);
    }
    counters_->sweeps.fetch_add(1, std::memory_order_relaxed);
    return out;
}

StateField OperatorSet::transport(const StateField& u, bool transposed) const
{
    check(u);
    StateField out(u.size());
    const kernels::Layout g{grid_.n_cells(), grid_.n_ordinates(), grid_.cell_width(), mu_.data(), sigma_.data(),
                            weight_.data()};
    const auto dir = transposed ? kernels::Direction::transposed : kernels::Direction::forward;
    if (policy_.threads > 1) {
        kernels::parallel::transport(g, u.data(), out.data(), dir, policy_.threads);
    } else {
        kernels::serial::transport(g, u.data(), out.data(), dir);
    }
    counters_->transport.fetch_add(1, std::memory_order_relaxed);
    return out;
}

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> OperatorSet::quadrature(const std::vector<double>& table,
                                                            const Eigen::Matrix<S, Eigen::Dynamic, 1>& u,
                                                            bool transpose) const
{
    check(u);
    Eigen::Matrix<S, Eigen::Dynamic, 1> out(u.size());
    const kernels::Layout g{grid_.n_cells(), grid_.n_ordinates(), grid_.cell_width(), mu_.data(), sigma_.data(),
                            weight_.data()};
    if (policy_.threads > 1) {
        kernels::parallel::quadrature<S>(g, table.data(), u.data(), out.data(), transpose, policy_.threads);
    } else {
        kernels::serial::quadrature<S>(g, table.data(), u.data(), out.data(), transpose);
    }
    return out;
}

StateField OperatorSet::solve_T(const StateField& q) const
{
    return sweep(q, false);
}

StateField OperatorSet::apply_T(const StateField& u) const
{
    return transport(u, false);
}

StateField OperatorSet::apply_K(const StateField& u) const
{
    counters_->scattering.fetch_add(1, std::memory_order_relaxed);
    return quadrature<double>(optics_.kappa_values(), u, false);
}

ComplexField OperatorSet::apply_K(const ComplexField& u) const
{
    counters_->scattering.fetch_add(1, std::memory_order_relaxed);
    return quadrature<Complex>(optics_.kappa_values(), u, false);
}

StateField OperatorSet::apply_F(const StateField& u) const
{
    counters_->fission.fetch_add(1, std::memory_order_relaxed);
    return quadrature<double>(optics_.phi_values(), u, false);
}

ComplexField OperatorSet::apply_F(const ComplexField& u) const
{
    counters_->fission.fetch_add(1, std::memory_order_relaxed);
    return quadrature<Complex>(optics_.phi_values(), u, false);
}

StateField OperatorSet::apply_B(const StateField& u) const
{
    return apply_T(u) - apply_K(u);
}

StateField OperatorSet::solve_T_transpose(const StateField& q) const
{
    return sweep(q, true);
}

StateField OperatorSet::apply_T_transpose(const StateField& u) const
{
    return transport(u, true);
}

StateField OperatorSet::apply_K_transpose(const StateField& u) const
{
    counters_->scattering.fetch_add(1, std::memory_order_relaxed);
    return quadrature<double>(optics_.kappa_values(), u, true);
}

StateField OperatorSet::apply_F_transpose(const StateField& u) const
{
    counters_->fission.fetch_add(1, std::memory_order_relaxed);
    return quadrature<double>(optics_.phi_values(), u, true);
}

StateField OperatorSet::apply_adjoint(Op which, const StateField& u) const
{
    check(u);
    // A* = S^-1 A^T S with S = diag(sigma); the measure part h*w_k commutes through.
    const StateField su = sigma_.cwiseProduct(u);
    StateField out;
    switch (which) {
    case Op::T: out = apply_T_transpose(su); break;
    case Op::TInverse: out = solve_T_transpose(su); break;
    case Op::K: out = apply_K_transpose(su); break;
    case Op::F: out = apply_F_transpose(su); break;
    case Op::B: out = apply_T_transpose(su) - apply_K_transpose(su); break;
    case Op::C: throw Error(ErrorKind::ShapeMismatch, "the adjoint of C is provided by the source solver");
    }
    return out.cwiseQuotient(sigma_);
}

CostCounters OperatorSet::counters() const
{
    CostCounters c;
    c.sweeps = counters_->sweeps.load();
    c.transport_applications = counters_->transport.load();
    c.scattering_applications = counters_->scattering.load();
    c.fission_applications = counters_->fission.load();
    return c;
}

void OperatorSet::reset_counters() const
{
    counters_->sweeps = 0;
    counters_->transport = 0;
    counters_->scattering = 0;
    counters_->fission = 0;
}

namespace {

Eigen::MatrixXd assemble(const OperatorSet& ops, Op which, bool adjoint)
{
    const auto n = static_cast<Eigen::Index>(ops.size());
    Eigen::MatrixXd m(n, n);
    StateField e = StateField::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        if (adjoint) {
            m.col(j) = ops.apply_adjoint(which, e);
        } else {
            switch (which) {
            case Op::T: m.col(j) = ops.apply_T(e); break;
            case Op::TInverse: m.col(j) = ops.solve_T(e); break;
            case Op::K: m.col(j) = ops.apply_K(e); break;
            case Op::F: m.col(j) = ops.apply_F(e); break;
            case Op::B: m.col(j) = ops.apply_B(e); break;
            case Op::C: break;
            }
        }
        e[j] = 0.0;
    }
    return m;
}

}  // namespace

DenseOperator materialize(const OperatorSet& ops, Op which, bool adjoint, std::size_t cap)
{
    if (ops.size() > cap) {
        throw Error(ErrorKind::DimensionCap,
                    "dimension " + std::to_string(ops.size()) + " exceeds cap " + std::to_string(cap));
    }
    if (which == Op::C) {
        const Eigen::MatrixXd b = assemble(ops, Op::B, false);
        const Eigen::MatrixXd f = assemble(ops, Op::F, false);
        DenseOperator c{b.partialPivLu().solve(f), ops.space()};
        return adjoint ? weighted_adjoint(c) : c;
    }
    return {assemble(ops, which, adjoint), ops.space()};
}

}  // namespace certeig
