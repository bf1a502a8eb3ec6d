#include <doctest.h>

#include <cmath>
#include <random>

#include "certeig/errors.hpp"
#include "certeig/power_method.hpp"
#include "certeig/spectral_diagnostics.hpp"
#include "support.hpp"

using namespace certeig;
using testing::kind_of;

namespace {

double distance_to(const WeightedSpace& s, const StateField& a, const StateField& u1)
{
    return std::min(s.norm(StateField(a - u1)), s.norm(StateField(a + u1)));
}


}  // namespace

TEST_CASE("diag(2,1): iterates and Rayleigh quotients in closed form")
{
    const DenseCertifiedOperator c(testing::euclidean(testing::diag21()));
    StateField a(2);
    a << 1.0, 1.0;
    a /= std::sqrt(2.0);
    for (int n = 1; n <= 30; ++n) {
        const PowerStep s = power_step(c, a, 1e-14);
        // a_{n-1} is proportional to (2^{n-1}, 1)
        const double x = std::pow(2.0, n - 1);
        CHECK(s.rayleigh == doctest::Approx((2.0 * x * x + 1.0) / (x * x + 1.0)).epsilon(1e-13));
        CHECK(s.next[1] / s.next[0] == doctest::Approx(1.0 / (2.0 * x)).epsilon(1e-13));
        a = s.next;
    }
}

TEST_CASE("diag(2,1): distance ratio and gap estimate")
{
    const DenseCertifiedOperator c(testing::euclidean(testing::diag21()));
    StateField a0(2);
    a0 << 1.0, 1.0;
    PowerPolicy policy;
    policy.fixed_eta = 1e-15;
    const PowerTrace t = run_power(c, a0, 1e-9, policy, true);
    CHECK(t.converged);
    StateField u1(2);
    u1 << 1.0, 0.0;
    const WeightedSpace s = WeightedSpace::identity(2);
    for (std::size_t n = 5; n + 1 < t.iterates.size(); ++n) {
        const double r = distance_to(s, t.iterates[n + 1], u1) / distance_to(s, t.iterates[n], u1);
        CHECK(r == doctest::Approx(0.5).epsilon(1e-3));
    }
    const GapEstimate g = estimate_gap(t);
    CHECK(std::abs(g.gap - 0.5) <= 0.15);
    CHECK_FALSE(g.certified);
}

TEST_CASE("gap estimate needs four steps")
{
    PowerTrace t;
    t.rows.resize(3);
    CHECK(kind_of([&] { (void)estimate_gap(t); }) == ErrorKind::InsufficientData);
}

TEST_CASE("zero image and zero start are reported")
{
    const DenseCertifiedOperator zero(testing::euclidean(Eigen::MatrixXd::Zero(2, 2)));
    const StateField a = StateField::Ones(2);
    CHECK(kind_of([&] { (void)power_step(zero, a, 1e-10); }) == ErrorKind::ZeroImage);
    const DenseCertifiedOperator c(testing::euclidean(testing::diag21()));
    CHECK(kind_of([&] { (void)run_power(c, StateField(StateField::Zero(2)), 1e-6); }) == ErrorKind::ZeroImage);
}

TEST_CASE("oscillating iterates stagnate")
{
    Eigen::MatrixXd swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    const DenseCertifiedOperator c(testing::euclidean(swap));
    StateField a0(2);
    a0 << 1.0, 0.0;
    CHECK(kind_of([&] { (void)run_power(c, a0, 1e-6); }) == ErrorKind::Stagnation);
}

TEST_CASE("exact applies on the transport operator: rates and Rayleigh error")
{
    for (const char* name : {"const", "het"}) {
        const testing::Problem p(name);
        const DenseOperator dense = materialize(p.ops, Op::C);
        const SpectralReport rep = dense_eigendecompose(dense);
        const DenseCertifiedOperator c(dense);
        std::mt19937_64 rng(31);
        StateField a = testing::random_field(p.n(), rng, 0.0, 1.0);
        a /= p.space().norm(a);
        double prev = distance_to(p.space(), a, rep.u1);
        for (int n = 0; n < 60; ++n) {
            const PowerStep s = power_step(c, a, 1e-15);
            CHECK(std::abs(s.rayleigh - rep.mu1) <= (rep.mu1 + rep.norm_C) * prev + 1e-14);
            const double d = distance_to(p.space(), s.next, rep.u1);
            if (n >= 20 && d > 1e-12) {
                CHECK(d / prev <= rep.q_ratio + 0.05);
            }
            prev = d;
            a = s.next;
        }
        CHECK(prev <= 1e-10);
    }
}

TEST_CASE("perturbed power iteration with proportional tolerances")
{
    const testing::Problem p("het");
    const SpectralReport rep = dense_eigendecompose(materialize(p.ops, Op::C));
    const StateField a0 = StateField::Ones(static_cast<Eigen::Index>(p.n()));
    const PowerTrace t = run_power(p.c, a0, 1e-8, PowerPolicy{}, false);
    CHECK(t.converged);
    CHECK(distance_to(p.space(), t.final_iterate, rep.u1) <= 1e-6);
    CHECK(std::abs(t.rows.back().rayleigh - rep.mu1) <= 1e-6);
    for (std::size_t j = 1; j < t.rows.size(); ++j) {
        CHECK(t.rows[j].c_applications == t.rows[j - 1].c_applications + 1);
    }
}

TEST_CASE("norm interval brackets the dense norm")
{
    for (const char* name : {"const", "het", "ref"}) {
        const testing::Problem p(name);
        const double exact = weighted_norm(materialize(p.ops, Op::C));
        const NormInterval iv =
            estimate_norm_C(p.c, 1e-10, 30, transport_norm_upper_bound(p.ops.assumptions()));
        CHECK(iv.lo <= exact);
        CHECK(iv.lo >= 0.99 * exact);
        CHECK(exact <= iv.hi);
    }
}
