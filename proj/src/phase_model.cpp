#include "certeig/phase_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_integration.h>

#include "certeig/errors.hpp"

namespace certeig {

namespace {

void require_same_grid(const PhaseGrid& grid, const OpticalField& optics)
{
    if (grid.n_cells() != optics.n_cells() || grid.n_ordinates() != optics.n_ordinates()) {
        throw Error(ErrorKind::ShapeMismatch, "optical field does not match the phase grid");
    }
}

void require_finite_nonnegative(const std::vector<double>& values, const char* name)
{
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorKind::InvalidOptics, std::string(name) + " must be finite and nonnegative");
        }
    }
}

// Quadrature masses of one kernel table at (cell, k): sum over k_out of w * table(k, k_out)
// (row mass) and sum over k_in of w * table(k_in, k) (column mass).
template <class Table>
void kernel_masses(const PhaseGrid& grid, std::size_t cell, std::size_t k, Table table, double& row,
                   double& col)
{
    row = 0.0;
    col = 0.0;
    for (std::size_t j = 0; j < grid.n_ordinates(); ++j) {
        row += grid.weight(j) * table(cell, k, j);
        col += grid.weight(j) * table(cell, j, k);
    }
}

}  // namespace

PhaseGrid::PhaseGrid(std::size_t n_cells, double length, double mu_min, std::vector<Ordinate> ordinates)
    : n_cells_(n_cells), length_(length), mu_min_(mu_min), ordinates_(std::move(ordinates))
{
}

PhaseGrid PhaseGrid::build(std::size_t n_cells, double length, std::size_t n_per_half, double mu_min)
{
    if (n_cells < 1 || !(length > 0.0) || !std::isfinite(length) || n_per_half < 1 || !(mu_min > 0.0) ||
        !(mu_min < 1.0)) {
        throw Error(ErrorKind::InvalidGrid, "need n_cells >= 1, L > 0, n_per_half >= 1, 0 < mu_min < 1");
    }

    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n_per_half);
    if (table == nullptr) {
        throw Error(ErrorKind::InvalidGrid, "cannot build Gauss-Legendre table");
    }
    std::vector<Ordinate> half(n_per_half);
    for (std::size_t i = 0; i < n_per_half; ++i) {
        double x = 0.0;
        double w = 0.0;
        gsl_integration_glfixed_point(mu_min, 1.0, i, &x, &w, table);
        half[i] = {x, w};
    }
    gsl_integration_glfixed_table_free(table);

    std::sort(half.begin(), half.end(), [](const Ordinate& a, const Ordinate& b) { return a.mu < b.mu; });

    std::vector<Ordinate> ordinates;
    ordinates.reserve(2 * n_per_half);
    for (auto it = half.rbegin(); it != half.rend(); ++it) {
        ordinates.push_back({-it->mu, it->weight});
    }
    ordinates.insert(ordinates.end(), half.begin(), half.end());

    double total = 0.0;
    for (const auto& o : ordinates) {
        total += o.weight;
    }
    for (auto& o : ordinates) {
        o.weight /= total;
    }
    return PhaseGrid(n_cells, length, mu_min, std::move(ordinates));
}

OpticalField::OpticalField(const PhaseGrid& grid, std::vector<double> sigma, std::vector<double> kappa,
                           std::vector<double> phi)
    : n_cells_(grid.n_cells()),
      n_ord_(grid.n_ordinates()),
      sigma_(std::move(sigma)),
      kappa_(std::move(kappa)),
      phi_(std::move(phi))
{
    const std::size_t n = n_cells_ * n_ord_;
    if (sigma_.size() != n || kappa_.size() != n * n_ord_ || phi_.size() != n * n_ord_) {
        throw Error(ErrorKind::ShapeMismatch, "optical tables do not match the grid shape");
    }
    require_finite_nonnegative(sigma_, "sigma");
    require_finite_nonnegative(kappa_, "kappa");
    require_finite_nonnegative(phi_, "phi");
    for (double s : sigma_) {
        if (!(s > 0.0)) {
            throw Error(ErrorKind::InvalidOptics, "sigma must be strictly positive");
        }
    }
}

OpticalField OpticalField::constant(const PhaseGrid& grid, double sigma, double kappa, double phi)
{
    const std::size_t n = grid.size();
    return OpticalField(grid, std::vector<double>(n, sigma), std::vector<double>(n * grid.n_ordinates(), kappa),
                        std::vector<double>(n * grid.n_ordinates(), phi));
}

double OpticalField::sigma_min() const
{
    return *std::min_element(sigma_.begin(), sigma_.end());
}

double OpticalField::sigma_max() const
{
    return *std::max_element(sigma_.begin(), sigma_.end());
}

double compute_rho(const PhaseGrid& grid, const OpticalField& optics)
{
    require_same_grid(grid, optics);
    auto kappa = [&](std::size_t i, std::size_t a, std::size_t b) { return optics.kappa(i, a, b); };
    double rho = 0.0;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        for (std::size_t k = 0; k < grid.n_ordinates(); ++k) {
            double row = 0.0;
            double col = 0.0;
            kernel_masses(grid, i, k, kappa, row, col);
            rho = std::max(rho, std::max(row, col) / optics.sigma(i, k));
        }
    }
    return rho;
}

AssumptionReport check_assumptions(const PhaseGrid& grid, const OpticalField& optics)
{
    require_same_grid(grid, optics);
    auto kappa = [&](std::size_t i, std::size_t a, std::size_t b) { return optics.kappa(i, a, b); };
    auto phi = [&](std::size_t i, std::size_t a, std::size_t b) { return optics.phi(i, a, b); };

    AssumptionReport report;
    report.alpha = std::numeric_limits<double>::infinity();
    report.M = 0.0;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        for (std::size_t k = 0; k < grid.n_ordinates(); ++k) {
            double row = 0.0;
            double col = 0.0;
            kernel_masses(grid, i, k, kappa, row, col);
            const double s = optics.sigma(i, k);
            report.alpha = std::min(report.alpha, std::min(s - row, s - col));
            report.M = std::max(report.M, std::max(row, col));
            kernel_masses(grid, i, k, phi, row, col);
            report.M = std::max(report.M, std::max(row, col));
        }
    }
    const auto& phis = optics.phi_values();
    report.c_f = *std::min_element(phis.begin(), phis.end());
    report.rho = compute_rho(grid, optics);
    report.sigma_min = optics.sigma_min();
    report.sigma_max = optics.sigma_max();
    report.accretive = report.alpha > 0.0;
    report.fission_positive = report.c_f > 0.0;
    report.contractive = report.rho < 1.0;
    return report;
}

WeightedSpace::WeightedSpace(Eigen::VectorXd weights) : weights_(std::move(weights)) {}

WeightedSpace WeightedSpace::identity(std::size_t n)
{
    return WeightedSpace(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
}

double WeightedSpace::dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const
{
    if (u.size() != weights_.size() || v.size() != weights_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "field size does not match the space");
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
        s += weights_[j] * u[j] * v[j];
    }
    return s;
}

Complex WeightedSpace::dot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const
{
    if (u.size() != weights_.size() || v.size() != weights_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "field size does not match the space");
    }
    Complex s = 0.0;
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
        s += weights_[j] * u[j] * std::conj(v[j]);
    }
    return s;
}

double WeightedSpace::norm(const Eigen::VectorXd& u) const
{
    return std::sqrt(std::max(0.0, dot(u, u)));
}

double WeightedSpace::norm(const Eigen::VectorXcd& u) const
{
    return std::sqrt(std::max(0.0, dot(u, u).real()));
}

Eigen::VectorXd measure_weights(const PhaseGrid& grid, const OpticalField& optics, Weighting weighting)
{
    require_same_grid(grid, optics);
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
    const double h = grid.cell_width();
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        for (std::size_t k = 0; k < grid.n_ordinates(); ++k) {
            double v = h * grid.weight(k);
            if (weighting == Weighting::sigma) {
                v *= optics.sigma(i, k);
            }
            w[static_cast<Eigen::Index>(grid.index(i, k))] = v;
        }
    }
    return w;
}

WeightedSpace make_space(const PhaseGrid& grid, const OpticalField& optics, Weighting weighting)
{
    return WeightedSpace(measure_weights(grid, optics, weighting));
}

double inner_product(const PhaseGrid& grid, const OpticalField& optics, const StateField& u, const StateField& v,
                     Weighting weighting)
{
    return make_space(grid, optics, weighting).dot(u, v);
}

Complex inner_product(const PhaseGrid& grid, const OpticalField& optics, const ComplexField& u,
                      const ComplexField& v, Weighting weighting)
{
    return make_space(grid, optics, weighting).dot(u, v);
}

double norm(const PhaseGrid& grid, const OpticalField& optics, const StateField& u, Weighting weighting)
{
    return make_space(grid, optics, weighting).norm(u);
}

}  // namespace certeig
