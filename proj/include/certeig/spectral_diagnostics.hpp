#pragma once

#include <cstdint>
#include <vector>

#include "certeig/contour.hpp"
#include "certeig/dense.hpp"
#include "certeig/eigen_iterate.hpp"

namespace certeig {

struct SpectralReport {
    WeightedSpace space;
    std::vector<Complex> eigenvalues;  // sorted by modulus, largest first
    std::vector<double> residuals;     // |Av - mu v| / |v| for each eigenvalue
    double norm_C = 0.0;

    double mu1 = 0.0;
    double lambda0 = 0.0;  // 1 / mu1
    StateField u1;         // unit, sign chosen so the entries sum to a positive number
    StateField u1_adjoint; // unit eigenvector of A* for mu1, <u1, u1*> > 0
    bool mu1_simple = false;
    double u1_min_entry = 0.0;

    bool has_second = false;
    Complex mu2 = 0.0;
    ComplexField u_Lambda;          // eigenvector of A for mu2
    ComplexField u_Lambda_adjoint;  // unit eigenvector of A* for conj(mu2)
    double gap = 0.0;               // 1 - |mu2| / mu1
    double gap_bar = 0.0;           // |1 - mu2 / mu1|
    double q_ratio = 0.0;           // |mu2| / mu1

    double theta = 0.0;
    StateField r_circ;              // minimizing right singular vector of the projected M
    double subspace_distance = 0.0; // sine of the angle between u1 and u1*
};

// Dense nonsymmetric eigendecomposition with residual certificates. Throws CertificateFail
// when any reported pair misses |Av - mu v| <= 1e-8 |A| |v|, NoConvergence if the solver fails.
SpectralReport dense_eigendecompose(const DenseOperator& a);

struct ThetaResult {
    double theta = 0.0;
    StateField right;  // minimizer of |P M w| over unit w orthogonal to u1
    StateField left;
};

// Smallest singular value of P (I - lambda0 A) restricted to the orthogonal complement of u1.
ThetaResult compute_theta(const SpectralReport& report, const DenseOperator& a);

struct SandwichRecord {
    double overlap = 0.0;  // |<r_circ, u*_Lambda>|
    double lhs = 0.0;      // gap * overlap
    double mid = 0.0;      // gap_bar * overlap
    double theta = 0.0;
    double rhs = 0.0;      // (1 - dist) * gap_bar
    double dist = 0.0;
    bool lower_pass = false;  // lhs <= mid <= theta
    bool upper_pass = false;  // theta <= rhs
    bool pass = false;
};

SandwichRecord sandwich_check(const SpectralReport& report, double tol = 1e-10);

struct BudgetParams {
    double beta = 0.5;  // splits the gap in the power-method rate
    double p = 2.0;     // Schatten exponent
    int resolvent_samples = 64;
};

struct ConstantBudget {
    double norm_C = 0.0;
    double lambda0 = 0.0;
    double theta = 0.0;
    double M_lambda = 0.0;  // 1 + lambda0 |C|
    double M_bar = 0.0;     // 1 + lambda0 |C| + theta/4
    double beta = 0.0;
    double tau = 0.0;
    double beta_bar = 0.0;
    double gamma = 0.0;
    double lambda_radius = 0.0;  // theta / (4 |C|)
    double omega = 0.0;
    double eps0 = 0.0;
    double a_eps0 = 0.0;
    double C_bar = 0.0;       // lambda0 |C|
    double C_residual = 0.0;  // bound on |DR| over the neighbourhood: |R(u, nu)| <= C_residual e
    double eps1 = 0.0;

    double beta_power = 0.0;
    double eps_power = 0.0;  // beta * mu1 * gap
    double delta_bar = 0.0;  // (|mu2| + eps) / mu1

    double p = 0.0;
    double schatten_norm = 0.0;
    double a_p = 0.0;
    double b_p = 0.0;
    bool a_p_approximate = false;
    double log_M_schatten = 0.0;  // log M(beta, gap, C, p); NaN when b_p is unknown
    double ell0 = 0.0;            // from M(beta, gap, C, p); may be huge or NaN
    double resolvent_max = 0.0;   // sampled max over Gamma_eps of |R(z) (I - E1)|
    double ell0_resolvent = 0.0;  // from the sampled resolvent bound

    double norm_E1 = 0.0;
    double norm_E_rest = 0.0;
    double c1 = 0.0;  // c1 |||u||| <= |u| <= C1 |||u|||
    double C1 = 1.0;
};

// (1 - e)^2 (1/lambda0 - e |C| (2 + e))
double a_epsilon(double eps, double lambda0, double norm_C);

// Schatten constant a_p by maximizing |z|^-p log|(1+z) exp(sum_{j<ceil p} (-z)^j / j)| over a
// polar grid; exact values are returned for p = 1 and p = 2.
double schatten_a(double p, bool* approximate = nullptr);
double schatten_b(double p);

// The Newton part of the budget (M, beta_bar, gamma, tau, omega, ...) from |C|, lambda0, theta.
// Called with estimates when no dense oracle is available; the result is then heuristic.
ConstantBudget newton_constants(double norm_C, double lambda0, double theta);

ConstantBudget constant_budget(const SpectralReport& report, const DenseOperator& a, BudgetParams params = {});

// Eigenpair scaled to the gauge: |C u| = sqrt(gauge_sq).
EigenIterate oracle_pair(const SpectralReport& report, double gauge_sq = 2.0);

struct DRBoundCheck {
    std::size_t samples = 0;
    double worst = 0.0;        // largest |DR^-1| seen
    double worst_ratio = 0.0;  // worst / beta_bar
    double at_solution = 0.0;  // |DR(u0, lambda0)^-1|
    bool pass = false;
};

// Samples (u, nu) in B(u0, tau) x B(lambda0, theta/(4|C|)) and checks |DR^-1| <= beta_bar.
DRBoundCheck verify_DR_bound(const SpectralReport& report, const ConstantBudget& budget, const DenseOperator& a,
                             std::size_t n_samples, std::uint64_t seed, double gauge_sq = 2.0);

// Dense DR(u, nu) in the product space, and its inverse norm. exact_derivative selects the
// Frechet derivative of 1 - |Cu|^2/g^2 in the second row; otherwise -<Cu, .>.
Eigen::MatrixXd dense_DR(const DenseOperator& a, const StateField& u, double nu, double gauge_sq,
                         bool exact_derivative = true);
double dr_inverse_norm(const DenseOperator& a, const StateField& u, double nu, double gauge_sq,
                       bool exact_derivative = true);

// Spectral projector by trapezoid quadrature of the resolvent on the contour.
DenseOperator riesz_projection(const DenseOperator& a, const ContourSpec& spec,
                               const SpectralReport* report = nullptr);

// Rank-one spectral projector onto u1 along the complement: x -> <x,u1*>/<u1,u1*> u1.
DenseOperator principal_projector(const SpectralReport& report);

}  // namespace certeig
