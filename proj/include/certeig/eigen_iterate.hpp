#pragma once

#include <cmath>

#include "certeig/phase_model.hpp"

namespace certeig {

// An approximate eigenpair (u, lambda) of lambda C u = u. The scale of u is fixed by the
// residual constraint |Cu|^2 = gauge_sq.
struct EigenIterate {
    StateField u;
    double lambda = 0.0;
    double gauge_sq = 2.0;
};

// sqrt(|u|^2 + lambda^2) with |.| the norm of the space.
inline double product_norm(const WeightedSpace& space, const StateField& u, double lambda)
{
    const double nu = space.norm(u);
    return std::sqrt(nu * nu + lambda * lambda);
}

inline double product_distance(const WeightedSpace& space, const EigenIterate& a, const EigenIterate& b)
{
    return product_norm(space, StateField(a.u - b.u), a.lambda - b.lambda);
}

}  // namespace certeig
