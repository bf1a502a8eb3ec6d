#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "certeig/dense.hpp"
#include "certeig/phase_model.hpp"

namespace certeig {

enum class Op { T, TInverse, K, F, B, C };

struct ExecPolicy {
    int threads = 1;  // 1 selects the serial reference kernels
};

struct CostCounters {
    std::uint64_t sweeps = 0;
    std::uint64_t transport_applications = 0;
    std::uint64_t scattering_applications = 0;
    std::uint64_t fission_applications = 0;
};

// Matrix-free transport operators on a fixed grid. Adjoints (apply_adjoint) are taken in the
// sigma-weighted inner product. The *_transpose members are adjoints in the plain measure
// h*w_k, which for this discretization are the transposed stencils and kernel tables.
class OperatorSet {
public:
    OperatorSet(PhaseGrid grid, OpticalField optics, ExecPolicy policy = {});

    const PhaseGrid& grid() const { return grid_; }
    const OpticalField& optics() const { return optics_; }
    const WeightedSpace& space() const { return sigma_space_; }
    const WeightedSpace& plain_space() const { return plain_space_; }
    const AssumptionReport& assumptions() const { return report_; }
    const ExecPolicy& policy() const { return policy_; }
    std::size_t size() const { return grid_.size(); }

    StateField solve_T(const StateField& q) const;
    StateField apply_T(const StateField& u) const;
    StateField apply_K(const StateField& u) const;
    ComplexField apply_K(const ComplexField& u) const;
    StateField apply_F(const StateField& u) const;
    ComplexField apply_F(const ComplexField& u) const;
    StateField apply_B(const StateField& u) const;

    // which in {T, TInverse, K, F, B}
    StateField apply_adjoint(Op which, const StateField& u) const;

    StateField solve_T_transpose(const StateField& q) const;
    StateField apply_T_transpose(const StateField& u) const;
    StateField apply_K_transpose(const StateField& u) const;
    StateField apply_F_transpose(const StateField& u) const;

    CostCounters counters() const;
    void reset_counters() const;

private:
    struct Counters {
        std::atomic<std::uint64_t> sweeps{0};
        std::atomic<std::uint64_t> transport{0};
        std::atomic<std::uint64_t> scattering{0};
        std::atomic<std::uint64_t> fission{0};
    };

    void check(const StateField& u) const;
    void check(const ComplexField& u) const;
    StateField sweep(const StateField& q, bool transposed) const;
    StateField transport(const StateField& u, bool transposed) const;
    template <class S>
    Eigen::Matrix<S, Eigen::Dynamic, 1> quadrature(const std::vector<double>& table,
                                                   const Eigen::Matrix<S, Eigen::Dynamic, 1>& u,
                                                   bool transpose) const;

    PhaseGrid grid_;
    OpticalField optics_;
    ExecPolicy policy_;
    AssumptionReport report_;
    WeightedSpace sigma_space_;
    WeightedSpace plain_space_;
    std::vector<double> mu_;
    std::vector<double> weight_;
    StateField sigma_;
    std::unique_ptr<Counters> counters_;
};

constexpr std::size_t kDefaultDimensionCap = 4096;

// Column j is the operator applied to the j-th coordinate field. Op::C is formed as a dense
// LU solve of B against F. adjoint = true materializes the sigma-adjoint.
DenseOperator materialize(const OperatorSet& ops, Op which, bool adjoint = false,
                          std::size_t cap = kDefaultDimensionCap);

}  // namespace certeig
