#include "certeig/resolvent_quadrature.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "certeig/errors.hpp"

namespace certeig {

ComplexField DenseShiftedSolver::solve(Complex z, const ComplexField& rhs, double /*tol*/) const
{
    const Eigen::Index n = a_.rows();
    if (rhs.size() != n) {
        throw Error(ErrorKind::ShapeMismatch, "right-hand side does not match the operator");
    }
    const Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(n, n) - a_;
    return shifted.partialPivLu().solve(rhs);
}

namespace {

ComplexField solve_T_complex(const OperatorSet& ops, const ComplexField& q)
{
    const StateField re = ops.solve_T(StateField(q.real()));
    const StateField im = ops.solve_T(StateField(q.imag()));
    return re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
}

}  // namespace

ComplexField KrylovShiftedSolver::solve(Complex z, const ComplexField& rhs, double tol) const
{
    const WeightedSpace& space = ops_.space();
    const Eigen::Index n = rhs.size();
    // A w = w - T^-1 K w - T^-1 F w / z ;  b = (u - T^-1 K u) / z
    auto apply = [&](const ComplexField& w) {
        return ComplexField(w - solve_T_complex(ops_, ComplexField(ops_.apply_K(w) + ops_.apply_F(w) / z)));
    };
    const ComplexField b = (rhs - solve_T_complex(ops_, ops_.apply_K(rhs))) / z;
    // |z w - C w - u| <= |z| / (1 - rho) * |A w - b|
    const double target = tol * (1.0 - ops_.assumptions().rho) / std::abs(z);

    ComplexField x = ComplexField::Zero(n);
    const std::size_t m = restart_;
    for (std::size_t cycle = 0; cycle < max_cycles_; ++cycle) {
        const ComplexField r0 = b - apply(x);
        const double beta = space.norm(r0);
        if (beta <= target) {
            return x;
        }
        std::vector<ComplexField> v;
        v.push_back(r0 / beta);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m + 1));
        std::vector<double> cs(m);
        std::vector<Complex> sn(m);
        g[0] = beta;
        std::size_t used = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            ComplexField w = apply(v[j]);
            for (std::size_t i = 0; i <= j; ++i) {
                const Complex hij = space.dot(w, v[i]);
                h(static_cast<Eigen::Index>(i), jj) = hij;
                w -= hij * v[i];
            }
            const double hn = space.norm(w);
            h(jj + 1, jj) = hn;
            for (std::size_t i = 0; i < j; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const Complex t = cs[i] * h(ii, jj) + sn[i] * h(ii + 1, jj);
                h(ii + 1, jj) = -std::conj(sn[i]) * h(ii, jj) + cs[i] * h(ii + 1, jj);
                h(ii, jj) = t;
            }
            const Complex a = h(jj, jj);
            const double bb = std::abs(h(jj + 1, jj));
            const double r = std::hypot(std::abs(a), bb);
            if (std::abs(a) == 0.0) {
                cs[j] = 0.0;
                sn[j] = 1.0;
            } else {
                cs[j] = std::abs(a) / r;
                sn[j] = a * std::conj(h(jj + 1, jj)) / (std::abs(a) * r);
            }
            h(jj, jj) = cs[j] * a + sn[j] * h(jj + 1, jj);
            h(jj + 1, jj) = 0.0;
            g[jj + 1] = -std::conj(sn[j]) * g[jj];
            g[jj] = cs[j] * g[jj];
            used = j + 1;
            if (std::abs(g[jj + 1]) <= target || hn == 0.0) {
                break;
            }
            v.push_back(w / hn);
        }
        const auto k = static_cast<Eigen::Index>(used);
        const Eigen::VectorXcd y =
            h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        for (Eigen::Index i = 0; i < k; ++i) {
            x += y[i] * v[static_cast<std::size_t>(i)];
        }
    }
    return x;
}

CertifiedComplex shifted_resolve(const ShiftedSolver& solver, const CertifiedOperator& c, Complex z,
                                 const ComplexField& u_bar, double eta)
{
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::InvalidOptics, "tolerance must be positive");
    }
    const WeightedSpace& space = c.space();
    CertifiedComplex out;
    if (space.norm(u_bar) == 0.0) {
        out.value = ComplexField::Zero(u_bar.size());
        return out;
    }
    double tol = 0.25 * eta;
    double last = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt, tol *= 0.1) {
        ComplexField w = solver.solve(z, u_bar, tol);
        const CertifiedComplex cw = c.apply(w, 0.25 * eta);
        const double res = space.norm(ComplexField(z * w - cw.value - u_bar));
        last = res + cw.bound;
        out.c_applications += 1;
        if (last <= eta) {
            out.value = std::move(w);
            out.bound = last;
            out.iterations = static_cast<std::size_t>(attempt) + 1;
            return out;
        }
    }
    throw Error(ErrorKind::ShiftTooClose, "shifted residual " + std::to_string(last) + " exceeds " +
                                              std::to_string(eta) + " at z = (" + std::to_string(z.real()) + ", " +
                                              std::to_string(z.imag()) + ")");
}

namespace {

struct ContourSums {
    ComplexField projected;  // sum c_j w_j          ~ E1 u
    ComplexField moment;     // sum c_j z_j w_j      ~ C E1 u
    ComplexField integral;   // sum c_j f(z_j) w_j
};

ContourSums contour_sums(const ShiftedSolver& solver, const CertifiedOperator& c, const ContourSpec& spec,
                         const StateField& u_bar, double eta_inner)
{
    const Complex mu = spec.center();
    const ComplexField u = u_bar.cast<Complex>();
    const Eigen::Index n = u_bar.size();
    ContourSums s{ComplexField::Zero(n), ComplexField::Zero(n), ComplexField::Zero(n)};
    for (std::size_t j = 0; j < spec.n_nodes(); ++j) {
        const Complex z = spec.node(j);
        const Complex cj = spec.weight(j);
        const ComplexField w = shifted_resolve(solver, c, z, u, eta_inner).value;
        s.projected += cj * w;
        s.moment += (cj * z) * w;
        s.integral += (cj * mu * z / (mu - z)) * w;
    }
    return s;
}

}  // namespace

ComplexField contour_integral(const ShiftedSolver& solver, const CertifiedOperator& c, const ContourSpec& spec,
                              const StateField& u_bar, double eta_inner)
{
    return contour_sums(solver, c, spec, u_bar, eta_inner).integral;
}

ResolventResult apply_resolventC(const ShiftedSolver& solver, const CertifiedOperator& c, const ContourSpec& spec,
                                 double lambda_bar, const StateField& u_bar, double eta_inner)
{
    const Complex mu = spec.center();
    if (std::abs(lambda_bar * mu - 1.0) > 1e-12) {
        throw Error(ErrorKind::ContourDegenerate, "contour center must be 1 / lambda_bar");
    }
    const WeightedSpace& space = c.space();
    const ContourSums s = contour_sums(solver, c, spec, u_bar, eta_inner);

    ResolventResult out;
    out.solves = spec.n_nodes();
    ComplexField value = -s.integral - mu * u_bar.cast<Complex>();
    const double pp = space.dot(s.projected, s.projected).real();
    if (pp > 0.0 && std::sqrt(pp) > 1e-14 * space.norm(u_bar)) {
        out.mu1_estimate = space.dot(s.moment, s.projected) / pp;
        const Complex f = mu * out.mu1_estimate / (mu - out.mu1_estimate);
        value += f * s.projected;
    }
    out.value = value.real();
    out.imag_norm = space.norm(StateField(value.imag()));
    const auto n = static_cast<double>(spec.n_nodes());
    out.imag_tolerance =
        10.0 * n * eta_inner + 1e-12 * n * (space.norm(out.value) + std::abs(mu) * space.norm(u_bar));
    if (out.imag_norm > out.imag_tolerance) {
        throw Error(ErrorKind::ImaginaryResidue, "imaginary part " + std::to_string(out.imag_norm) +
                                                     " exceeds " + std::to_string(out.imag_tolerance));
    }
    return out;
}

}  // namespace certeig
