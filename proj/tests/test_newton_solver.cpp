#include <doctest.h>

#include <cmath>
#include <random>

#include "certeig/errors.hpp"
#include "certeig/newton_solver.hpp"
#include "certeig/spectral_diagnostics.hpp"
#include "support.hpp"

using namespace certeig;
using testing::kind_of;
using testing::random_field;

namespace {

struct Oracle {
    testing::Problem p;
    DenseOperator dense;
    SpectralReport rep;
    DenseCertifiedOperator exact;
    EigenIterate sol;
    ConstantBudget budget;

    explicit Oracle(const char* name)
        : p(name), dense(materialize(p.ops, Op::C)), rep(dense_eigendecompose(dense)), exact(dense),
          sol(oracle_pair(rep)), budget(newton_constants(rep.norm_C, rep.lambda0, rep.theta))
    {
    }

    // A point at product distance r from the solution, in a random direction.
    EigenIterate perturbed(double r, std::mt19937_64& rng) const
    {
        StateField d = random_field(p.n(), rng);
        std::normal_distribution<double> g(0.0, 1.0);
        const double dn = g(rng);
        const double scale = r / product_norm(p.space(), d, dn);
        EigenIterate it = sol;
        it.u += scale * d;
        it.lambda += scale * dn;
        return it;
    }
};

// R(u, nu) evaluated exactly on the dense matrix.
Direction exact_residual(const DenseOperator& a, const EigenIterate& it)
{
    const StateField cu = a.matrix * it.u;
    const double n = a.space.norm(cu);
    return {StateField(it.u - it.lambda * cu), 1.0 - n * n / it.gauge_sq};
}

}  // namespace

TEST_CASE("residual vanishes at the oracle eigenpair and its bound is sound")
{
    const Oracle o("const");
    const Residual at = residual_R(o.exact, o.sol, 1e-14);
    CHECK(at.norm <= 1e-12);
    std::mt19937_64 rng(41);
    const EigenIterate it = o.perturbed(1e-3, rng);
    const Direction exact = exact_residual(o.dense, it);
    for (double eta : {1e-4, 1e-8}) {
        const Residual r = residual_R(o.p.c, it, eta);
        CHECK(product_norm(o.p.space(), StateField(r.r1 - exact.u), r.r2 - exact.nu) <= r.bound + 1e-14);
    }
}

TEST_CASE("exact Jacobian matches central differences of R")
{
    const Oracle o("het");
    std::mt19937_64 rng(42);
    const EigenIterate base = o.perturbed(1e-2, rng);
    const Direction d{random_field(o.p.n(), rng), 0.7};
    const Direction jd = apply_DR(o.exact, base, d, 1e-15);
    const double e = 1e-5;
    EigenIterate plus = base;
    EigenIterate minus = base;
    plus.u += e * d.u;
    plus.lambda += e * d.nu;
    minus.u -= e * d.u;
    minus.lambda -= e * d.nu;
    const Direction rp = exact_residual(o.dense, plus);
    const Direction rm = exact_residual(o.dense, minus);
    const StateField fd_u = (rp.u - rm.u) / (2 * e);
    const double fd_nu = (rp.nu - rm.nu) / (2 * e);
    CHECK(product_norm(o.p.space(), StateField(jd.u - fd_u), jd.nu - fd_nu) <= 1e-8);

    // the unscaled constraint row is not the derivative
    const Direction unscaled = apply_DR(o.exact, base, d, 1e-15, JacobianForm::unscaled);
    CHECK(std::abs(unscaled.nu - fd_nu) > 1e-3);
}

TEST_CASE("matrix-free DR and its adjoint agree with the dense DR")
{
    const Oracle o("const");
    std::mt19937_64 rng(43);
    const EigenIterate base = o.perturbed(1e-2, rng);
    const Eigen::Index n = static_cast<Eigen::Index>(o.p.n());
    for (bool exact : {true, false}) {
        const JacobianForm form = exact ? JacobianForm::exact : JacobianForm::unscaled;
        const Eigen::MatrixXd dr = dense_DR(o.dense, base.u, base.lambda, base.gauge_sq, exact);
        const Linearization lin(o.p.c, base, 1e-13, form);
        for (int t = 0; t < 5; ++t) {
            const Direction x{random_field(o.p.n(), rng), 0.3};
            const Direction y{random_field(o.p.n(), rng), -1.1};
            Eigen::VectorXd xv(n + 1);
            xv << x.u, x.nu;
            const Eigen::VectorXd dx = dr * xv;
            const Direction jx = lin.apply(x, 1e-13);
            CHECK(product_norm(o.p.space(), StateField(jx.u - dx.head(n)), jx.nu - dx[n]) <= 1e-10);
            // <J x, y> = <x, J* y> in the product space
            const Direction jty = lin.apply_adjoint(y, 1e-13);
            const double lhs = o.p.space().dot(jx.u, y.u) + jx.nu * y.nu;
            const double rhs = o.p.space().dot(x.u, jty.u) + x.nu * jty.nu;
            CHECK(std::abs(lhs - rhs) <= 1e-9);
        }
    }
}

TEST_CASE("oracle update: saddle solve and block elimination agree")
{
    const Oracle o("het");
    std::mt19937_64 rng(44);
    for (int t = 0; t < 5; ++t) {
        const EigenIterate it = o.perturbed(o.budget.omega / 2.0, rng);
        const OracleUpdate up = newton_update_oracle(o.dense, it);
        CHECK_FALSE(up.perturbed);
        CHECK(product_norm(o.p.space(), StateField(up.delta.u - up.elimination.u), up.delta.nu - up.elimination.nu) <=
              1e-10);
        // the update solves DR delta = -R
        const Direction jd = apply_DR(o.exact, it, up.delta, 1e-15);
        const Direction r = exact_residual(o.dense, it);
        CHECK(product_norm(o.p.space(), StateField(jd.u + r.u), jd.nu + r.nu) <= 1e-12);
    }
}

TEST_CASE("descent update reaches its residual target and approaches the saddle solution")
{
    const Oracle o("const");
    std::mt19937_64 rng(45);
    const EigenIterate it = o.perturbed(o.budget.omega / 2.0, rng);
    const OracleUpdate up = newton_update_oracle(o.dense, it);
    const double beta_hat = o.budget.beta_bar;
    const double dr_inv = dr_inverse_norm(o.dense, it.u, it.lambda, it.gauge_sq);
    for (double eta : {1e-4, 1e-7}) {
        DescentOptions opt;
        opt.beta_hat = beta_hat;
        const DescentResult d = newton_update_descent(o.p.c, it, eta, opt);
        CHECK(d.achieved_residual <= eta / beta_hat);
        const double diff = product_norm(o.p.space(), StateField(d.delta.u - up.delta.u), d.delta.nu - up.delta.nu);
        CHECK(diff <= dr_inv * d.achieved_residual * 1.01);
        CHECK(d.c_applications > 0);
    }
}

TEST_CASE("unperturbed Newton converges quadratically from omega/2")
{
    for (const char* name : {"const", "het"}) {
        const Oracle o(name);
        std::mt19937_64 rng(46);
        const double bound = o.budget.beta_bar * o.budget.gamma / 2.0 * 1.1;
        for (int t = 0; t < 3; ++t) {
            EigenIterate it = o.perturbed(o.budget.omega / 2.0, rng);
            double e = product_distance(o.p.space(), it, o.sol);
            for (int step = 0; step < 4 && e > 1e-12; ++step) {
                const OracleUpdate up = newton_update_oracle(o.dense, it);
                it.u += up.delta.u;
                it.lambda += up.delta.nu;
                const double next = product_distance(o.p.space(), it, o.sol);
                if (next > 1e-13) {
                    CHECK(next / (e * e) <= bound);
                }
                e = next;
            }
            CHECK(e <= 1e-12);
        }
    }
}

TEST_CASE("unscaled constraint row converges only linearly")
{
    const Oracle o("const");
    std::mt19937_64 rng(47);
    EigenIterate it = o.perturbed(1e-3, rng);
    double e = product_distance(o.p.space(), it, o.sol);
    for (int step = 0; step < 6; ++step) {
        const OracleUpdate up = newton_update_oracle(o.dense, it, JacobianForm::unscaled);
        it.u += up.delta.u;
        it.lambda += up.delta.nu;
        const double next = product_distance(o.p.space(), it, o.sol);
        if (step >= 2) {
            // the scale error contracts by about |1 - mu1| per step
            CHECK(next / e == doctest::Approx(std::abs(1.0 - o.rep.mu1)).epsilon(0.05));
        }
        e = next;
    }
}

TEST_CASE("tolerance schedules")
{
    const QuadraticSchedule q{0.01, 50.0, 0.4};
    CHECK(schedule_eta(q, 1e-3) == doctest::Approx(10.0 * 1e-6));
    CHECK(schedule_eta(q, 1.0) == doctest::Approx(0.005));
    const LinearSchedule l{0.01, 0.5};
    CHECK(schedule_eta(l, 1e-3) == doctest::Approx(2.5e-4));
    CHECK(schedule_eta(l, 1.0) == doctest::Approx(0.005));
    const HybridSchedule h{l, q, 1e-4};
    CHECK(schedule_eta(h, 1e-3) == schedule_eta(l, 1e-3));
    CHECK(schedule_eta(h, 1e-5) == schedule_eta(q, 1e-5));
    CHECK(kind_of([] { validate(LinearSchedule{0.01, 1.0}); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { validate(QuadraticSchedule{0.01, 0.0, 1.0}); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { validate(LinearSchedule{-1.0, 0.5}); }) == ErrorKind::ParseError);
}

TEST_CASE("run_newton with the descent backend: certified estimates bound the true error")
{
    for (const char* name : {"const", "het"}) {
        const Oracle o(name);
        std::mt19937_64 rng(48);
        const EigenIterate init = o.perturbed(o.budget.omega / 2.0, rng);
        NewtonOptions opt;
        opt.beta_hat = o.budget.beta_bar;
        opt.oracle_error = [&](const EigenIterate& it) { return product_distance(o.p.space(), it, o.sol); };
        const ToleranceSchedule sched = LinearSchedule{o.budget.omega, 0.5};
        const NewtonTrace t = run_newton(o.p.c, init, sched, 1e-8, UpdateBackend::descent, opt);
        CHECK(t.converged);
        for (const NewtonRow& row : t.rows) {
            CHECK(row.oracle_error <= row.error_estimate);
        }
        CHECK(t.rows.back().oracle_error <= 1e-8);
        CHECK(t.iterates.size() == t.rows.size());
    }
}

TEST_CASE("run_newton argument checks")
{
    const Oracle o("const");
    const ToleranceSchedule sched = LinearSchedule{0.01, 0.5};
    CHECK(kind_of([&] { (void)run_newton(o.p.c, o.sol, sched, 0.0, UpdateBackend::descent, {}); }) ==
          ErrorKind::ParseError);
    CHECK(kind_of([&] { (void)run_newton(o.p.c, o.sol, sched, 1e-8, UpdateBackend::oracle, {}); }) ==
          ErrorKind::ParseError);
}
