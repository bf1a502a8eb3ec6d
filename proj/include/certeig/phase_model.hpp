#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace certeig {

using Complex = std::complex<double>;

// Phase-space fields are flat vectors indexed by cell * n_ordinates + ordinate.
using StateField = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

struct Ordinate {
    double mu;
    double weight;
};

class PhaseGrid {
public:
    // Gauss-Legendre nodes on [mu_min, 1], mirrored to [-1, -mu_min].
    // Ordinates are stored in ascending mu, so ordinate k pairs with n_ordinates()-1-k.
    static PhaseGrid build(std::size_t n_cells, double length, std::size_t n_per_half, double mu_min);

    std::size_t n_cells() const { return n_cells_; }
    std::size_t n_ordinates() const { return ordinates_.size(); }
    std::size_t size() const { return n_cells_ * ordinates_.size(); }
    double length() const { return length_; }
    double cell_width() const { return length_ / static_cast<double>(n_cells_); }
    double mu_min() const { return mu_min_; }
    double cell_center(std::size_t cell) const { return (static_cast<double>(cell) + 0.5) * cell_width(); }

    const std::vector<Ordinate>& ordinates() const { return ordinates_; }
    double mu(std::size_t k) const { return ordinates_[k].mu; }
    double weight(std::size_t k) const { return ordinates_[k].weight; }
    std::size_t mirror(std::size_t k) const { return ordinates_.size() - 1 - k; }
    std::size_t index(std::size_t cell, std::size_t k) const { return cell * ordinates_.size() + k; }

private:
    PhaseGrid(std::size_t n_cells, double length, double mu_min, std::vector<Ordinate> ordinates);

    std::size_t n_cells_;
    double length_;
    double mu_min_;
    std::vector<Ordinate> ordinates_;
};

// Cross-sections and kernels on a grid. Kernel tables are indexed (cell, k_in, k_out),
// i.e. kappa(i, k', k) is the rate of scattering from ordinate k' into ordinate k.
class OpticalField {
public:
    OpticalField(const PhaseGrid& grid, std::vector<double> sigma, std::vector<double> kappa,
                 std::vector<double> phi);

    static OpticalField constant(const PhaseGrid& grid, double sigma, double kappa, double phi);

    std::size_t n_cells() const { return n_cells_; }
    std::size_t n_ordinates() const { return n_ord_; }

    double sigma(std::size_t cell, std::size_t k) const { return sigma_[cell * n_ord_ + k]; }
    double kappa(std::size_t cell, std::size_t k_in, std::size_t k_out) const
    {
        return kappa_[(cell * n_ord_ + k_in) * n_ord_ + k_out];
    }
    double phi(std::size_t cell, std::size_t k_in, std::size_t k_out) const
    {
        return phi_[(cell * n_ord_ + k_in) * n_ord_ + k_out];
    }

    const std::vector<double>& sigma_values() const { return sigma_; }
    const std::vector<double>& kappa_values() const { return kappa_; }
    const std::vector<double>& phi_values() const { return phi_; }

    double sigma_min() const;
    double sigma_max() const;

private:
    std::size_t n_cells_;
    std::size_t n_ord_;
    std::vector<double> sigma_;
    std::vector<double> kappa_;
    std::vector<double> phi_;
};

struct AssumptionReport {
    double alpha = 0.0;
    double M = 0.0;
    double c_f = 0.0;
    double rho = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool accretive = false;        // alpha > 0
    bool fission_positive = false; // c_f > 0
    bool contractive = false;      // rho < 1

    bool pass() const { return accretive && fission_positive && contractive; }
};

AssumptionReport check_assumptions(const PhaseGrid& grid, const OpticalField& optics);
double compute_rho(const PhaseGrid& grid, const OpticalField& optics);

// Diagonal inner product <u, v> = sum_j weights_j u_j conj(v_j), summed in index order.
class WeightedSpace {
public:
    WeightedSpace() = default;
    explicit WeightedSpace(Eigen::VectorXd weights);

    static WeightedSpace identity(std::size_t n);

    std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    const Eigen::VectorXd& weights() const { return weights_; }

    double dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    Complex dot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;
    double norm(const Eigen::VectorXd& u) const;
    double norm(const Eigen::VectorXcd& u) const;

private:
    Eigen::VectorXd weights_;
};

enum class Weighting { plain, sigma };

// Measure weights h * w_k, optionally times sigma.
Eigen::VectorXd measure_weights(const PhaseGrid& grid, const OpticalField& optics, Weighting weighting);
WeightedSpace make_space(const PhaseGrid& grid, const OpticalField& optics, Weighting weighting);

double inner_product(const PhaseGrid& grid, const OpticalField& optics, const StateField& u,
                     const StateField& v, Weighting weighting);
Complex inner_product(const PhaseGrid& grid, const OpticalField& optics, const ComplexField& u,
                      const ComplexField& v, Weighting weighting);
double norm(const PhaseGrid& grid, const OpticalField& optics, const StateField& u, Weighting weighting);

}  // namespace certeig
