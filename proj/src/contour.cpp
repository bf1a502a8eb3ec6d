#include "certeig/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "certeig/errors.hpp"

namespace certeig {

ContourSpec::ContourSpec(Complex center, double radius, std::size_t n_nodes)
    : center_(center), radius_(radius), n_(n_nodes)
{
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(ErrorKind::ContourDegenerate, "contour radius must be positive");
    }
    if (n_nodes < 4) {
        throw Error(ErrorKind::ContourDegenerate, "contour needs at least 4 nodes");
    }
}

std::size_t ContourSpec::default_nodes(double eps)
{
    eps = std::clamp(eps, 1e-300, 0.5);
    return static_cast<std::size_t>(std::ceil(8.0 / 3.0 * std::log(1.0 / eps))) + 8;
}

Complex ContourSpec::node(std::size_t j) const
{
    const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
    return center_ + radius_ * Complex(std::cos(t), std::sin(t));
}

Complex ContourSpec::weight(std::size_t j) const
{
    return (node(j) - center_) / static_cast<double>(n_);
}

}  // namespace certeig
