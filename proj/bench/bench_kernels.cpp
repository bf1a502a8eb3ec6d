// Serial reference kernels against their OpenMP variants, and a full certified C application.
//
//   bench_kernels --benchmark_filter=sweep
//
// Args: cells, ordinates per half-range, threads (threads = 0 runs the serial kernel).

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "certeig/kernels.hpp"
#include "certeig/phase_model.hpp"
#include "certeig/source_solver.hpp"
#include "certeig/transport_ops.hpp"

using namespace certeig;

namespace {

struct Fixture {
    PhaseGrid grid;
    std::vector<double> mu;
    std::vector<double> weight;
    std::vector<double> sigma;
    std::vector<double> table;
    std::vector<double> in;
    std::vector<double> out;
    kernels::Layout layout{};

    Fixture(std::size_t cells, std::size_t per_half) : grid(PhaseGrid::build(cells, 1.0, per_half, 0.05))
    {
        const std::size_t n = grid.n_ordinates();
        for (std::size_t k = 0; k < n; ++k) {
            mu.push_back(grid.mu(k));
            weight.push_back(grid.weight(k));
        }
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(0.5, 1.5);
        sigma.resize(grid.size());
        in.resize(grid.size());
        out.resize(grid.size());
        for (auto& s : sigma) {
            s = 1.0 + d(rng);
        }
        for (auto& v : in) {
            v = d(rng);
        }
        table.resize(cells * n * n);
        for (auto& t : table) {
            t = 0.3 * d(rng);
        }
        layout = {cells, n, grid.cell_width(), mu.data(), sigma.data(), weight.data()};
    }
};

void sweep(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    const int threads = static_cast<int>(state.range(2));
    for (auto _ : state) {
        if (threads == 0) {
            kernels::serial::sweep(f.layout, f.in.data(), f.out.data(), kernels::Direction::forward);
        } else {
            kernels::parallel::sweep(f.layout, f.in.data(), f.out.data(), kernels::Direction::forward, threads);
        }
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.grid.size()));
}

void quadrature(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    const int threads = static_cast<int>(state.range(2));
    for (auto _ : state) {
        if (threads == 0) {
            kernels::serial::quadrature(f.layout, f.table.data(), f.in.data(), f.out.data(), false);
        } else {
            kernels::parallel::quadrature(f.layout, f.table.data(), f.in.data(), f.out.data(), false, threads);
        }
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.grid.size()));
}

// One certified application of C = B^-1 F at 1e-10 through OperatorSet and SourceSolver.
void apply_C(benchmark::State& state)
{
    const auto cells = static_cast<std::size_t>(state.range(0));
    const PhaseGrid g = PhaseGrid::build(cells, 1.0, static_cast<std::size_t>(state.range(1)), 0.05);
    const OpticalField optics = OpticalField::constant(g, 2.0, 0.6, 0.5);
    const OperatorSet ops(g, optics, ExecPolicy{std::max<int>(1, static_cast<int>(state.range(2)))});
    const SourceSolver solver(ops);
    const StateField x = StateField::Ones(static_cast<Eigen::Index>(ops.size()));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solver.apply_C(x, 1e-10).value.data());
    }
}

void args(benchmark::internal::Benchmark* b)
{
    for (int threads : {0, 1, 2, 4, 8}) {
        b->Args({4096, 8, threads});
        b->Args({1024, 32, threads});
    }
    b->ArgNames({"cells", "half", "threads"})->UseRealTime();
}

}  // namespace

BENCHMARK(sweep)->Apply(args);
BENCHMARK(quadrature)->Apply(args);
BENCHMARK(apply_C)->Args({1024, 16, 0})->Args({1024, 16, 4})->ArgNames({"cells", "half", "threads"})->UseRealTime();

BENCHMARK_MAIN();
