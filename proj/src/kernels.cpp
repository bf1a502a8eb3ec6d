#include "certeig/kernels.hpp"

#include <omp.h>

namespace certeig::kernels {

namespace {

inline bool marches_right(double mu, Direction dir)
{
    return (mu > 0.0) == (dir == Direction::forward);
}

inline void sweep_ordinate(const Layout& g, std::size_t k, const double* q, double* out, Direction dir)
{
    const double a = (g.mu[k] > 0.0 ? g.mu[k] : -g.mu[k]) / g.h;
    const std::size_t n = g.n_ord;
    double upstream = 0.0;
    if (marches_right(g.mu[k], dir)) {
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            const std::size_t j = i * n + k;
            upstream = (a * upstream + q[j]) / (a + g.sigma[j]);
            out[j] = upstream;
        }
    } else {
        for (std::size_t i = g.n_cells; i-- > 0;) {
            const std::size_t j = i * n + k;
            upstream = (a * upstream + q[j]) / (a + g.sigma[j]);
            out[j] = upstream;
        }
    }
}

inline void transport_ordinate(const Layout& g, std::size_t k, const double* u, double* out, Direction dir)
{
    const double a = (g.mu[k] > 0.0 ? g.mu[k] : -g.mu[k]) / g.h;
    const std::size_t n = g.n_ord;
    const bool right = marches_right(g.mu[k], dir);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const std::size_t j = i * n + k;
        double up = 0.0;
        if (right && i > 0) {
            up = u[j - n];
        } else if (!right && i + 1 < g.n_cells) {
            up = u[j + n];
        }
        out[j] = a * (u[j] - up) + g.sigma[j] * u[j];
    }
}

template <class S>
inline void quadrature_cell(const Layout& g, std::size_t cell, const double* table, const S* in, S* out,
                            bool transpose)
{
    const std::size_t n = g.n_ord;
    const double* t = table + cell * n * n;
    const S* x = in + cell * n;
    S* y = out + cell * n;
    for (std::size_t k = 0; k < n; ++k) {
        S acc = S(0);
        for (std::size_t kp = 0; kp < n; ++kp) {
            const double kern = transpose ? t[k * n + kp] : t[kp * n + k];
            acc += (g.weight[kp] * kern) * x[kp];
        }
        y[k] = acc;
    }
}

}  // namespace

namespace serial {

void sweep(const Layout& g, const double* q, double* out, Direction dir)
{
    for (std::size_t k = 0; k < g.n_ord; ++k) {
        sweep_ordinate(g, k, q, out, dir);
    }
}

void transport(const Layout& g, const double* u, double* out, Direction dir)
{
    for (std::size_t k = 0; k < g.n_ord; ++k) {
        transport_ordinate(g, k, u, out, dir);
    }
}

template <class S>
void quadrature(const Layout& g, const double* table, const S* in, S* out, bool transpose)
{
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        quadrature_cell(g, i, table, in, out, transpose);
    }
}

template void quadrature<double>(const Layout&, const double*, const double*, double*, bool);
template void quadrature<std::complex<double>>(const Layout&, const double*, const std::complex<double>*,
                                               std::complex<double>*, bool);

}  // namespace serial

namespace parallel {

void sweep(const Layout& g, const double* q, double* out, Direction dir, int threads)
{
    const auto n = static_cast<long>(g.n_ord);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long k = 0; k < n; ++k) {
        sweep_ordinate(g, static_cast<std::size_t>(k), q, out, dir);
    }
}

void transport(const Layout& g, const double* u, double* out, Direction dir, int threads)
{
    const auto n = static_cast<long>(g.n_ord);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long k = 0; k < n; ++k) {
        transport_ordinate(g, static_cast<std::size_t>(k), u, out, dir);
    }
}

template <class S>
void quadrature(const Layout& g, const double* table, const S* in, S* out, bool transpose, int threads)
{
    const auto n = static_cast<long>(g.n_cells);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long i = 0; i < n; ++i) {
        quadrature_cell(g, static_cast<std::size_t>(i), table, in, out, transpose);
    }
}

template void quadrature<double>(const Layout&, const double*, const double*, double*, bool, int);
template void quadrature<std::complex<double>>(const Layout&, const double*, const std::complex<double>*,
                                               std::complex<double>*, bool, int);

}  // namespace parallel

}  // namespace certeig::kernels
