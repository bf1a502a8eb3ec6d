#pragma once

#include <complex>
#include <cstddef>

namespace certeig::kernels {

// Raw view of a slab grid and its cross-sections. Fields are cell-major: index = cell * n_ord + k.
struct Layout {
    std::size_t n_cells;
    std::size_t n_ord;
    double h;
    const double* mu;
    const double* sigma;
    const double* weight;
};

// forward: the upwind stencil of T. transposed: the stencil of T^T, which marches against mu.
enum class Direction { forward, transposed };

// Serial reference implementations. Every reduction runs in a fixed order so the parallel
// variants below reproduce them bit for bit.
namespace serial {
void sweep(const Layout& g, const double* q, double* out, Direction dir);
void transport(const Layout& g, const double* u, double* out, Direction dir);
// out(i,k) = sum_k' w_k' table(i,k',k) in(i,k')   (transpose: table(i,k,k'))
template <class S>
void quadrature(const Layout& g, const double* table, const S* in, S* out, bool transpose);
}  // namespace serial

// OpenMP variants: sweeps parallel over ordinates, quadratures parallel over cells.
namespace parallel {
void sweep(const Layout& g, const double* q, double* out, Direction dir, int threads);
void transport(const Layout& g, const double* u, double* out, Direction dir, int threads);
template <class S>
void quadrature(const Layout& g, const double* table, const S* in, S* out, bool transpose, int threads);
}  // namespace parallel

}  // namespace certeig::kernels
