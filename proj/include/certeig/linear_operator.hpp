#pragma once

#include <atomic>
#include <cstdint>

#include "certeig/dense.hpp"
#include "certeig/phase_model.hpp"

namespace certeig {

// A value with a certified error bound in the sigma-norm.
template <class T>
struct Certified {
    T value;
    double bound = 0.0;
    std::size_t iterations = 0;
    std::uint64_t c_applications = 0;
};

using CertifiedResult = Certified<StateField>;
using CertifiedComplex = Certified<ComplexField>;

// An operator that can be applied to within a requested absolute tolerance in its space.
// The solvers only see this interface, so they run unchanged on the transport operator C
// and on dense synthetic matrices.
class CertifiedOperator {
public:
    virtual ~CertifiedOperator() = default;

    virtual std::size_t dim() const = 0;
    virtual const WeightedSpace& space() const = 0;
    virtual CertifiedResult apply(const StateField& x, double eta) const = 0;
    virtual CertifiedResult apply_adjoint(const StateField& x, double eta) const = 0;

    // Real and imaginary parts applied separately at eta/sqrt(2) each.
    CertifiedComplex apply(const ComplexField& x, double eta) const;

    std::uint64_t applications() const { return applications_.load(); }

protected:
    void count() const { applications_.fetch_add(1, std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> applications_{0};
};

// Exact (to round-off) application of a dense matrix; bounds are reported as zero.
class DenseCertifiedOperator final : public CertifiedOperator {
public:
    explicit DenseCertifiedOperator(DenseOperator op);

    std::size_t dim() const override { return static_cast<std::size_t>(op_.dim()); }
    const WeightedSpace& space() const override { return op_.space; }
    CertifiedResult apply(const StateField& x, double eta) const override;
    CertifiedResult apply_adjoint(const StateField& x, double eta) const override;
    using CertifiedOperator::apply;

    const DenseOperator& dense() const { return op_; }

private:
    DenseOperator op_;
    DenseOperator adjoint_;
};

}  // namespace certeig
