#pragma once

#include <cstddef>

#include <Eigen/LU>

#include "certeig/contour.hpp"
#include "certeig/dense.hpp"
#include "certeig/linear_operator.hpp"
#include "certeig/transport_ops.hpp"

namespace certeig {

// Solver for (z I - C) w = rhs. tol is a hint for iterative backends.
class ShiftedSolver {
public:
    virtual ~ShiftedSolver() = default;
    virtual ComplexField solve(Complex z, const ComplexField& rhs, double tol) const = 0;
};

// Dense LU of z I - A.
class DenseShiftedSolver final : public ShiftedSolver {
public:
    explicit DenseShiftedSolver(const DenseOperator& a) : a_(a.matrix.cast<Complex>()) {}
    ComplexField solve(Complex z, const ComplexField& rhs, double tol) const override;

private:
    Eigen::MatrixXcd a_;
};

// Matrix-free GMRES on the transport form T^-1 (B - F/z) w = T^-1 B rhs / z, which is
// equivalent to (z I - C) w = rhs and needs only sweeps and kernel quadratures.
class KrylovShiftedSolver final : public ShiftedSolver {
public:
    explicit KrylovShiftedSolver(const OperatorSet& ops, std::size_t restart = 60, std::size_t max_cycles = 40)
        : ops_(ops), restart_(restart), max_cycles_(max_cycles)
    {
    }
    ComplexField solve(Complex z, const ComplexField& rhs, double tol) const override;

private:
    const OperatorSet& ops_;
    std::size_t restart_;
    std::size_t max_cycles_;
};

// Solves (z I - C) w = u_bar and certifies |z w - C w - u_bar| <= eta with one application of C
// at eta/4. Retries with tighter solver tolerances, then throws ShiftTooClose.
CertifiedComplex shifted_resolve(const ShiftedSolver& solver, const CertifiedOperator& c, Complex z,
                                 const ComplexField& u_bar, double eta);

struct ResolventResult {
    StateField value;
    double imag_norm = 0.0;
    double imag_tolerance = 0.0;
    Complex mu1_estimate = 0.0;  // Rayleigh ratio of the projected pieces
    std::size_t solves = 0;
};

// M_{lambda_bar}^-1 C u_bar from the shifted solves on the contour around mu_bar = 1/lambda_bar.
// The integrand mu_bar z/(mu_bar - z) has a pole at the center, so the raw trapezoid sum I_N
// equals -f(C)(I - E1) u_bar - mu_bar u_bar; the E1 part is restored from the same solves.
ResolventResult apply_resolventC(const ShiftedSolver& solver, const CertifiedOperator& c, const ContourSpec& spec,
                                 double lambda_bar, const StateField& u_bar, double eta_inner);

// The raw trapezoid sum sum_j (z_j - mu_bar)/N * mu_bar z_j/(mu_bar - z_j) * w_j.
ComplexField contour_integral(const ShiftedSolver& solver, const CertifiedOperator& c, const ContourSpec& spec,
                              const StateField& u_bar, double eta_inner);

}  // namespace certeig
