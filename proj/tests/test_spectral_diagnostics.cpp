#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "certeig/errors.hpp"
#include "certeig/spectral_diagnostics.hpp"
#include "support.hpp"

using namespace certeig;
using testing::kind_of;

namespace {

double residual_norm(const DenseOperator& a, const EigenIterate& it)
{
    const StateField cu = a.matrix * it.u;
    const double n = a.space.norm(cu);
    return product_norm(a.space, StateField(it.u - it.lambda * cu), 1.0 - n * n / it.gauge_sq);
}

}  // namespace

TEST_CASE("diag(2,1) report")
{
    const SpectralReport r = dense_eigendecompose(testing::euclidean(testing::diag21()));
    CHECK(r.mu1 == doctest::Approx(2.0));
    CHECK(r.lambda0 == doctest::Approx(0.5));
    CHECK(r.mu1_simple);
    CHECK(std::abs(r.u1[0]) == doctest::Approx(1.0));
    CHECK(r.u1[0] > 0.0);
    CHECK(std::abs(r.mu2 - Complex(1.0, 0.0)) <= 1e-14);
    CHECK(r.gap == doctest::Approx(0.5));
    CHECK(r.gap_bar == doctest::Approx(0.5));
    CHECK(r.theta == doctest::Approx(0.5));
    CHECK(r.subspace_distance <= 1e-14);
    CHECK(r.norm_C == doctest::Approx(2.0));
    for (double res : r.residuals) {
        CHECK(res <= 1e-14);
    }
    const SandwichRecord s = sandwich_check(r);
    CHECK(s.pass);
    CHECK(s.theta == doctest::Approx(s.rhs));
}

TEST_CASE("upper triangular [[2,1],[0,1]]: skewed eigenvectors")
{
    const SpectralReport r = dense_eigendecompose(testing::euclidean(testing::upper21()));
    CHECK(r.mu1 == doctest::Approx(2.0));
    CHECK(r.subspace_distance == doctest::Approx(std::sqrt(0.5)));
    CHECK(r.theta == doctest::Approx(0.5));
    CHECK(std::abs(r.u1_adjoint[0]) == doctest::Approx(std::sqrt(0.5)));
    const SandwichRecord s = sandwich_check(r);
    CHECK(s.overlap == doctest::Approx(1.0));
    CHECK(s.lower_pass);
    // theta = 0.5 against (1 - 1/sqrt 2) * 0.5: the upper bound does not hold here
    CHECK_FALSE(s.upper_pass);
}

TEST_CASE("symmetric nonnegative PSD operators: theta = gap_bar = gap")
{
    std::mt19937_64 rng(61);
    for (int t = 0; t < 20; ++t) {
        const SpectralReport r = dense_eigendecompose(testing::euclidean(testing::random_symmetric_psd(12, rng)));
        CHECK(std::abs(r.theta - r.gap_bar) <= 1e-10);
        CHECK(std::abs(r.gap_bar - r.gap) <= 1e-10);
        CHECK(r.subspace_distance <= 1e-10);
        CHECK(sandwich_check(r).pass);
    }
}

TEST_CASE("random positive operators: lower sandwich bound")
{
    std::mt19937_64 rng(62);
    for (int t = 0; t < 20; ++t) {
        const SpectralReport r = dense_eigendecompose(testing::euclidean(testing::random_positive(10, rng)));
        CHECK(r.u1_min_entry > 0.0);
        const SandwichRecord s = sandwich_check(r);
        CHECK(s.lower_pass);
        CHECK(s.theta <= r.gap_bar + 1e-12);
    }
}

TEST_CASE("sandwich needs a second eigenvalue")
{
    Eigen::MatrixXd one(1, 1);
    one(0, 0) = 3.0;
    const SpectralReport r = dense_eigendecompose(testing::euclidean(one));
    CHECK_FALSE(r.has_second);
    CHECK(kind_of([&] { (void)sandwich_check(r); }) == ErrorKind::DegenerateGap);
}

TEST_CASE("a_eps and Schatten constants")
{
    CHECK(a_epsilon(0.0, 4.0, 0.3) == doctest::Approx(0.25));
    CHECK(a_epsilon(0.1, 4.0, 0.3) < 0.25);
    CHECK(schatten_a(1.0) == 1.0);
    CHECK(schatten_a(2.0) == 0.5);
    CHECK(schatten_b(2.0) == 0.5);
    CHECK(schatten_b(1.0) == 0.0);
    CHECK(std::isnan(schatten_b(3.0)));
    bool approx = false;
    const double a3 = schatten_a(3.0, &approx);
    CHECK(approx);
    CHECK(a3 > 0.0);
    CHECK(kind_of([] { (void)schatten_a(0.0); }) == ErrorKind::UnsupportedP);

    // sup over z of |z|^-2 (log|1 + z| - Re z), by brute force on a polar grid
    double best = -1e300;
    for (int i = 1; i <= 400; ++i) {
        const double rad = 1e-3 * std::pow(1e4, i / 400.0);
        for (int j = 0; j < 360; ++j) {
            const Complex z = std::polar(rad, 2.0 * std::numbers::pi * j / 360.0);
            const double v = (std::log(std::abs(1.0 + z)) - z.real()) / (rad * rad);
            best = std::max(best, v);
        }
    }
    CHECK(best == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("constant budget on the constant scenario")
{
    const testing::Problem p("const");
    const DenseOperator c = materialize(p.ops, Op::C);
    const SpectralReport r = dense_eigendecompose(c);
    const ConstantBudget b = constant_budget(r, c);
    CHECK(b.C_bar == doctest::Approx(r.lambda0 * r.norm_C));
    CHECK(b.M_lambda == doctest::Approx(1.0 + r.lambda0 * r.norm_C));
    CHECK(b.lambda_radius == doctest::Approx(r.theta / (4.0 * r.norm_C)));
    CHECK(b.omega > 0.0);
    CHECK(b.omega <= b.tau);
    CHECK(b.omega <= 1.0 / (3.0 * b.beta_bar * b.gamma));
    CHECK(b.a_eps0 > 0.0);
    CHECK(b.delta_bar < 1.0);
    CHECK(std::isfinite(b.ell0));
    CHECK(std::isfinite(b.ell0_resolvent));
    CHECK(b.c1 <= 1.0);
    // a smaller inf-sup constant only shrinks the neighbourhood
    const ConstantBudget worse = newton_constants(r.norm_C, r.lambda0, r.theta / 2.0);
    CHECK(worse.beta_bar > b.beta_bar);
    CHECK(worse.omega < b.omega);
    CHECK(kind_of([&] { (void)newton_constants(r.norm_C, r.lambda0, 0.0); }) == ErrorKind::DegenerateGap);
}

TEST_CASE("oracle pair satisfies the gauge and the eigen equation")
{
    const testing::Problem p("het");
    const DenseOperator c = materialize(p.ops, Op::C);
    const SpectralReport r = dense_eigendecompose(c);
    const EigenIterate it = oracle_pair(r);
    CHECK(p.space().norm(StateField(c.matrix * it.u)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(residual_norm(c, it) <= 1e-12);
    CHECK(r.u1_min_entry >= -1e-12);
}

TEST_CASE("DR inverse bound and residual bound over the neighbourhood")
{
    const testing::Problem p("const");
    const DenseOperator c = materialize(p.ops, Op::C);
    const SpectralReport r = dense_eigendecompose(c);
    const ConstantBudget b = constant_budget(r, c);
    const DRBoundCheck chk = verify_DR_bound(r, b, c, 30, 7);
    CHECK(chk.pass);
    CHECK(chk.samples == 30);
    CHECK(chk.at_solution <= chk.worst);

    const EigenIterate sol = oracle_pair(r);
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        EigenIterate it = sol;
        StateField d = testing::random_field(p.n(), rng);
        d *= b.tau * std::abs(unif(rng)) / p.space().norm(d);
        it.u += d;
        it.lambda += b.lambda_radius * unif(rng);
        const double e = product_distance(p.space(), it, sol);
        const double rn = residual_norm(c, it);
        CHECK(e <= b.beta_bar * rn);
        CHECK(rn <= b.C_residual * e);
    }
}

TEST_CASE("spectral projectors on diag(2,1) and [[2,1],[0,1]]")
{
    for (const Eigen::MatrixXd& m : {testing::diag21(), testing::upper21()}) {
        const DenseOperator a = testing::euclidean(m);
        const SpectralReport r = dense_eigendecompose(a);
        const DenseOperator e = riesz_projection(a, ContourSpec(Complex(2.0, 0.0), 0.5, 64), &r);
        const DenseOperator p1 = principal_projector(r);
        CHECK((e.matrix - p1.matrix).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((e.matrix * e.matrix - e.matrix).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((e.matrix * r.u1 - r.u1).norm() <= 1e-12);
        CHECK((e.matrix * m - m * e.matrix).cwiseAbs().maxCoeff() <= 1e-12);
        const DenseOperator rest = riesz_projection(a, ContourSpec(Complex(1.0, 0.0), 0.5, 64), &r);
        CHECK((e.matrix * rest.matrix).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((e.matrix + rest.matrix - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const SpectralReport d = dense_eigendecompose(testing::euclidean(testing::diag21()));
    const DenseOperator p1 = principal_projector(d);
    CHECK(p1.matrix(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(p1.matrix(1, 1)) <= 1e-15);
}
