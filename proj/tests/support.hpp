#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "certeig/dense.hpp"
#include "certeig/errors.hpp"
#include "certeig/scenario.hpp"
#include "certeig/source_solver.hpp"
#include "certeig/transport_ops.hpp"

namespace testing {

using certeig::StateField;

// A builtin scenario with its operators and certified C.
struct Problem {
    certeig::Scenario scenario;
    certeig::OperatorSet ops;
    certeig::SourceSolver solver;
    certeig::TransportC c;

    explicit Problem(const char* name, int threads = 1)
        : scenario(certeig::builtin_scenario(name)),
          ops(scenario.grid, scenario.optics, certeig::ExecPolicy{threads}), solver(ops), c(solver)
    {
    }
    std::size_t n() const { return ops.size(); }
    const certeig::WeightedSpace& space() const { return ops.space(); }
};

inline StateField random_field(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    StateField v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = d(rng);
    }
    return v;
}

inline certeig::DenseOperator euclidean(const Eigen::MatrixXd& m)
{
    return certeig::DenseOperator{m, certeig::WeightedSpace::identity(static_cast<std::size_t>(m.rows()))};
}

inline Eigen::MatrixXd diag21()
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    return m;
}

inline Eigen::MatrixXd upper21()
{
    Eigen::MatrixXd m(2, 2);
    m << 2.0, 1.0, 0.0, 1.0;
    return m;
}

// Random entrywise positive matrix (Perron root simple and dominant).
inline Eigen::MatrixXd random_positive(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(0.05, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = d(rng);
        }
    }
    return m;
}

// Symmetric positive semidefinite with nonnegative entries: B^T B, B >= 0.
inline Eigen::MatrixXd random_symmetric_psd(int n, std::mt19937_64& rng)
{
    const Eigen::MatrixXd b = random_positive(n, rng);
    return b.transpose() * b / n;
}

// Kind of the certeig::Error thrown by f; fails the test when nothing is thrown.
certeig::ErrorKind kind_of(auto&& f)
{
    try {
        f();
    } catch (const certeig::Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return certeig::ErrorKind::ParseError;
}

}  // namespace testing
