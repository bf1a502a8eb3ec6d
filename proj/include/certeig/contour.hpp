#pragma once

#include <cstddef>

#include "certeig/phase_model.hpp"

namespace certeig {

// Circle zeta_j = center + radius * exp(2 pi i j / N), j = 0..N-1.
class ContourSpec {
public:
    ContourSpec(Complex center, double radius, std::size_t n_nodes);

    // Node count for a target accuracy eps: ceil(8/3 ln(1/eps)) + 8.
    static std::size_t default_nodes(double eps);

    Complex center() const { return center_; }
    double radius() const { return radius_; }
    std::size_t n_nodes() const { return n_; }
    Complex node(std::size_t j) const;
    // Trapezoid weight of (1/(2 pi i)) times the contour integral at node j: (node_j - center) / N.
    Complex weight(std::size_t j) const;

private:
    Complex center_;
    double radius_;
    std::size_t n_;
};

}  // namespace certeig
