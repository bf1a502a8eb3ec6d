#include <doctest.h>

#include <random>

#include "certeig/errors.hpp"
#include "certeig/kernels.hpp"
#include "certeig/transport_ops.hpp"
#include "support.hpp"

using namespace certeig;
using testing::random_field;

namespace {

OperatorSet constant_ops(std::size_t cells, double sigma, double kappa, double phi, int threads = 1)
{
    const PhaseGrid g = PhaseGrid::build(cells, 1.0, 2, 0.1);
    return OperatorSet(g, OpticalField::constant(g, sigma, kappa, phi), ExecPolicy{threads});
}

}  // namespace

TEST_CASE("sweep: zero source")
{
    const OperatorSet ops = constant_ops(8, 2.0, 0.5, 0.5);
    CHECK(ops.solve_T(StateField::Zero(static_cast<Eigen::Index>(ops.size()))).norm() == 0.0);
}

TEST_CASE("sweep: constant coefficients follow the upwind recursion")
{
    const OperatorSet ops = constant_ops(16, 2.0, 0.5, 0.5);
    const PhaseGrid& g = ops.grid();
    const StateField q = StateField::Constant(static_cast<Eigen::Index>(ops.size()), 2.0);
    const StateField u = ops.solve_T(q);
    const double h = g.cell_width();
    for (std::size_t k = 0; k < g.n_ordinates(); ++k) {
        const double a = std::abs(g.mu(k)) / h;
        double prev = 0.0;
        for (std::size_t step = 0; step < g.n_cells(); ++step) {
            // downstream order: left to right for mu > 0, right to left otherwise
            const std::size_t i = g.mu(k) > 0.0 ? step : g.n_cells() - 1 - step;
            const double expect = (a * prev + 2.0) / (a + 2.0);
            CHECK(u[static_cast<Eigen::Index>(g.index(i, k))] == doctest::Approx(expect).epsilon(1e-14));
            CHECK(expect > prev);
            CHECK(expect < 1.0);
            prev = expect;
        }
    }
}

TEST_CASE("sweep and stencil are inverse to each other")
{
    std::mt19937_64 rng(3);
    const testing::Problem p("het");
    for (int t = 0; t < 10; ++t) {
        const StateField q = random_field(p.n(), rng);
        CHECK((p.ops.apply_T(p.ops.solve_T(q)) - q).norm() <= 1e-12 * q.norm());
        CHECK((p.ops.solve_T(p.ops.apply_T(q)) - q).norm() <= 1e-12 * q.norm());
        CHECK((p.ops.apply_T_transpose(p.ops.solve_T_transpose(q)) - q).norm() <= 1e-12 * q.norm());
    }
}

TEST_CASE("stencil: constant field")
{
    const OperatorSet ops = constant_ops(8, 2.0, 0.5, 0.5);
    const PhaseGrid& g = ops.grid();
    const StateField u = StateField::Constant(static_cast<Eigen::Index>(ops.size()), 3.0);
    const StateField tu = ops.apply_T(u);
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
        for (std::size_t k = 0; k < g.n_ordinates(); ++k) {
            const bool inflow = (g.mu(k) > 0.0 && i == 0) || (g.mu(k) < 0.0 && i + 1 == g.n_cells());
            const double expect = inflow ? (std::abs(g.mu(k)) / g.cell_width() + 2.0) * 3.0 : 6.0;
            CHECK(tu[static_cast<Eigen::Index>(g.index(i, k))] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    CHECK(ops.apply_T(StateField::Zero(u.size())).norm() == 0.0);
}

TEST_CASE("kernels: constant quadrature and zero input")
{
    const OperatorSet ops = constant_ops(8, 2.0, 0.5, 0.25);
    const StateField one = StateField::Ones(static_cast<Eigen::Index>(ops.size()));
    CHECK((ops.apply_K(one) - 0.5 * one).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((ops.apply_F(one) - 0.25 * one).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(ops.apply_K(StateField(StateField::Zero(one.size()))).norm() == 0.0);
}

TEST_CASE("positivity of T^-1, K, F, B^-1 pieces")
{
    std::mt19937_64 rng(5);
    const testing::Problem p("het");
    for (int t = 0; t < 20; ++t) {
        const StateField u = random_field(p.n(), rng, 0.0, 1.0);
        CHECK(p.ops.solve_T(u).minCoeff() >= 0.0);
        CHECK(p.ops.apply_K(u).minCoeff() >= 0.0);
        CHECK(p.ops.apply_F(u).minCoeff() >= 0.0);
        CHECK(p.ops.solve_T_transpose(u).minCoeff() >= 0.0);
    }
}

TEST_CASE("B without scattering is T")
{
    std::mt19937_64 rng(6);
    const OperatorSet ops = constant_ops(8, 2.0, 0.0, 0.5);
    const StateField u = random_field(ops.size(), rng);
    CHECK((ops.apply_B(u) - ops.apply_T(u)).norm() == 0.0);
}

TEST_CASE("B is accretive with the reported alpha")
{
    std::mt19937_64 rng(7);
    for (const char* name : {"const", "het", "ref"}) {
        const testing::Problem p(name);
        const double alpha = p.ops.assumptions().alpha;
        for (int t = 0; t < 30; ++t) {
            const StateField u = random_field(p.n(), rng);
            const double bu = p.ops.plain_space().dot(p.ops.apply_B(u), u);
            const double nu = p.ops.plain_space().norm(u);
            CHECK(bu >= alpha * nu * nu * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("sigma-adjoints satisfy the defining identity")
{
    std::mt19937_64 rng(8);
    const testing::Problem p("het");
    const WeightedSpace& s = p.space();
    auto apply = [&](Op op, const StateField& u) -> StateField {
        switch (op) {
        case Op::T: return p.ops.apply_T(u);
        case Op::TInverse: return p.ops.solve_T(u);
        case Op::K: return p.ops.apply_K(u);
        case Op::F: return p.ops.apply_F(u);
        case Op::B: return p.ops.apply_B(u);
        case Op::C: break;
        }
        return u;
    };
    for (Op op : {Op::T, Op::TInverse, Op::K, Op::F, Op::B}) {
        for (int t = 0; t < 10; ++t) {
            const StateField u = random_field(p.n(), rng);
            const StateField v = random_field(p.n(), rng);
            const double lhs = s.dot(apply(op, u), v);
            const double rhs = s.dot(u, p.ops.apply_adjoint(op, v));
            const double scale = op == Op::T || op == Op::B ? 100.0 : 1.0;  // |T| ~ mu/h
            CHECK(std::abs(lhs - rhs) <= 1e-12 * scale * s.norm(u) * s.norm(v));
        }
    }
    CHECK_THROWS_AS(p.ops.apply_adjoint(Op::C, StateField::Ones(static_cast<Eigen::Index>(p.n()))), Error);
}

TEST_CASE("symmetric kernel with uniform sigma is self-adjoint")
{
    std::mt19937_64 rng(9);
    const OperatorSet ops = constant_ops(8, 2.0, 0.5, 0.5);
    const StateField u = random_field(ops.size(), rng);
    CHECK((ops.apply_adjoint(Op::K, u) - ops.apply_K(u)).norm() <= 1e-15 * u.norm() * 10);
}

TEST_CASE("materialized operators agree with the matrix-free ones")
{
    std::mt19937_64 rng(10);
    const testing::Problem p("const");
    const DenseOperator tinv = materialize(p.ops, Op::TInverse);
    CHECK(tinv.matrix.minCoeff() >= 0.0);
    const DenseOperator tinv_adj = materialize(p.ops, Op::TInverse, true);
    CHECK((tinv_adj.matrix - weighted_adjoint(tinv).matrix).cwiseAbs().maxCoeff() <= 1e-12);

    const DenseOperator b = materialize(p.ops, Op::B);
    const DenseOperator c = materialize(p.ops, Op::C);
    for (int t = 0; t < 5; ++t) {
        const StateField u = random_field(p.n(), rng);
        CHECK((b.matrix * u - p.ops.apply_B(u)).cwiseAbs().maxCoeff() <= 1e-13);
        const CertifiedResult cu = p.solver.apply_C(u, 1e-12);
        CHECK(p.space().norm(StateField(c.matrix * u - cu.value)) <= 1e-10);
    }
    CHECK(c.matrix.minCoeff() >= -1e-12);
}

TEST_CASE("materialize refuses large dimensions")
{
    const testing::Problem p("ref");
    try {
        (void)materialize(p.ops, Op::C, false, 100);
        FAIL("expected DimensionCap");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionCap);
    }
}

TEST_CASE("cost counters track sweeps and quadratures")
{
    const testing::Problem p("const");
    p.ops.reset_counters();
    const StateField u = StateField::Ones(static_cast<Eigen::Index>(p.n()));
    (void)p.ops.solve_T(u);
    (void)p.ops.apply_K(u);
    (void)p.ops.apply_F(u);
    const CostCounters c = p.ops.counters();
    CHECK(c.sweeps == 1);
    CHECK(c.scattering_applications == 1);
    CHECK(c.fission_applications == 1);
}

TEST_CASE("OpenMP kernels reproduce the serial ones bit for bit")
{
    std::mt19937_64 rng(12);
    const testing::Problem serial("ref", 1);
    const testing::Problem par("ref", 4);
    for (int t = 0; t < 5; ++t) {
        const StateField u = random_field(serial.n(), rng);
        CHECK(serial.ops.solve_T(u) == par.ops.solve_T(u));
        CHECK(serial.ops.apply_T(u) == par.ops.apply_T(u));
        CHECK(serial.ops.apply_K(u) == par.ops.apply_K(u));
        CHECK(serial.ops.apply_F(u) == par.ops.apply_F(u));
        CHECK(serial.ops.solve_T_transpose(u) == par.ops.solve_T_transpose(u));
        CHECK(serial.ops.apply_K_transpose(u) == par.ops.apply_K_transpose(u));
        const ComplexField z = u.cast<Complex>() * Complex(0.3, -1.0);
        CHECK(serial.ops.apply_K(z) == par.ops.apply_K(z));
        CHECK(serial.solver.apply_C(u, 1e-10).value == par.solver.apply_C(u, 1e-10).value);
    }
}
