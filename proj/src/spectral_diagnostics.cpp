#include "certeig/spectral_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "certeig/errors.hpp"

namespace certeig {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rotate a complex eigenvector so its largest entry is real positive.
Eigen::VectorXcd align_phase(const Eigen::VectorXcd& v)
{
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex p = v[imax];
    if (std::abs(p) == 0.0) {
        return v;
    }
    return v * (std::abs(p) / p);
}

Eigen::Index closest(const Eigen::VectorXcd& values, Complex target)
{
    Eigen::Index best = 0;
    (values.array() - target).abs().minCoeff(&best);
    return best;
}

StateField real_unit(const WeightedSpace& space, const Eigen::VectorXcd& v)
{
    StateField r = align_phase(v).real();
    return r / space.norm(r);
}

}  // namespace

SpectralReport dense_eigendecompose(const DenseOperator& a)
{
    const Eigen::Index n = a.dim();
    if (n < 1 || a.matrix.cols() != n || static_cast<std::size_t>(n) != a.space.size()) {
        throw Error(ErrorKind::ShapeMismatch, "dense operator must be square and match its space");
    }
    SpectralReport rep;
    rep.space = a.space;
    rep.norm_C = weighted_norm(a);

    Eigen::EigenSolver<Eigen::MatrixXd> es(a.matrix, true);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::NoConvergence, "dense eigensolver failed");
    }
    const Eigen::VectorXcd values = es.eigenvalues();
    const Eigen::MatrixXcd vectors = es.eigenvectors();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        const double ax = std::abs(values[x]);
        const double ay = std::abs(values[y]);
        if (ax != ay) {
            return ax > ay;
        }
        if (values[x].real() != values[y].real()) {
            return values[x].real() > values[y].real();
        }
        return values[x].imag() > values[y].imag();
    });

    const double slack = 1e-8 * rep.norm_C;
    const Eigen::MatrixXcd ac = a.matrix.cast<Complex>();
    for (Eigen::Index j : order) {
        const Eigen::VectorXcd v = vectors.col(j);
        const double res = a.space.norm(Eigen::VectorXcd(ac * v - values[j] * v)) / a.space.norm(v);
        if (!(res <= slack) && rep.norm_C > 0.0) {
            throw Error(ErrorKind::CertificateFail, "eigenpair residual " + std::to_string(res) + " exceeds " +
                                                        std::to_string(slack));
        }
        rep.eigenvalues.push_back(values[j]);
        rep.residuals.push_back(res);
    }

    const Complex mu1 = rep.eigenvalues.front();
    if (!(mu1.real() > 0.0) || std::abs(mu1.imag()) > 1e-10 * std::abs(mu1)) {
        throw Error(ErrorKind::CertificateFail, "principal eigenvalue is not real and positive");
    }
    rep.mu1 = mu1.real();
    rep.lambda0 = 1.0 / rep.mu1;
    rep.u1 = real_unit(a.space, vectors.col(order[0]));
    if (rep.u1.sum() < 0.0) {
        rep.u1 = -rep.u1;
    }
    rep.u1_min_entry = rep.u1.minCoeff();

    const DenseOperator adj = weighted_adjoint(a);
    Eigen::EigenSolver<Eigen::MatrixXd> es_adj(adj.matrix, true);
    if (es_adj.info() != Eigen::Success) {
        throw Error(ErrorKind::NoConvergence, "dense eigensolver failed on the adjoint");
    }
    const Eigen::VectorXcd adj_values = es_adj.eigenvalues();
    const Eigen::MatrixXcd adj_vectors = es_adj.eigenvectors();
    {
        const Eigen::Index j = closest(adj_values, mu1);
        rep.u1_adjoint = real_unit(a.space, adj_vectors.col(j));
        if (a.space.dot(rep.u1, rep.u1_adjoint) < 0.0) {
            rep.u1_adjoint = -rep.u1_adjoint;
        }
        const StateField r = adj.matrix * rep.u1_adjoint - rep.mu1 * rep.u1_adjoint;
        if (!(a.space.norm(r) <= slack) && rep.norm_C > 0.0) {
            throw Error(ErrorKind::CertificateFail, "adjoint principal eigenvector residual too large");
        }
    }
    const double c = std::clamp(a.space.dot(rep.u1, rep.u1_adjoint), -1.0, 1.0);
    rep.subspace_distance = std::sqrt(std::max(0.0, 1.0 - c * c));

    rep.mu1_simple = true;
    if (n >= 2) {
        rep.has_second = true;
        rep.mu2 = rep.eigenvalues[1];
        rep.mu1_simple = rep.mu1 - std::abs(rep.mu2) > slack;
        const Eigen::VectorXcd v2 = vectors.col(order[1]);
        rep.u_Lambda = v2 / a.space.norm(v2);
        const Eigen::Index j = closest(adj_values, std::conj(rep.mu2));
        const Eigen::VectorXcd w2 = adj_vectors.col(j);
        rep.u_Lambda_adjoint = w2 / a.space.norm(w2);
        rep.q_ratio = std::abs(rep.mu2) / rep.mu1;
        rep.gap = 1.0 - rep.q_ratio;
        rep.gap_bar = std::abs(1.0 - rep.mu2 / rep.mu1);
        const ThetaResult t = compute_theta(rep, a);
        rep.theta = t.theta;
        rep.r_circ = t.right;
    } else {
        rep.theta = kNaN;
        rep.gap = rep.gap_bar = kNaN;
    }
    return rep;
}

ThetaResult compute_theta(const SpectralReport& report, const DenseOperator& a)
{
    const Eigen::Index n = a.dim();
    ThetaResult out;
    if (n < 2) {
        out.theta = kNaN;
        return out;
    }
    const Eigen::VectorXd s = a.space.weights().cwiseSqrt();
    const Eigen::MatrixXd ae = to_euclidean(a);
    const Eigen::VectorXd ue = s.cwiseProduct(report.u1).normalized();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ue);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd basis = q.rightCols(n - 1);

    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - report.lambda0 * ae;
    const Eigen::MatrixXd proj = basis.transpose() * m * basis;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(proj, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.theta = svd.singularValues()(n - 2);
    out.right = s.cwiseInverse().cwiseProduct(basis * svd.matrixV().col(n - 2));
    out.left = s.cwiseInverse().cwiseProduct(basis * svd.matrixU().col(n - 2));
    out.right /= a.space.norm(out.right);
    out.left /= a.space.norm(out.left);
    return out;
}

SandwichRecord sandwich_check(const SpectralReport& report, double tol)
{
    if (!report.has_second) {
        throw Error(ErrorKind::DegenerateGap, "sandwich check needs a second eigenvalue");
    }
    if (!report.mu1_simple) {
        throw Error(ErrorKind::DegenerateGap, "mu1 and |mu2| coincide within the certificate");
    }
    SandwichRecord rec;
    rec.overlap = std::abs(report.space.dot(ComplexField(report.r_circ.cast<Complex>()), report.u_Lambda_adjoint));
    rec.lhs = report.gap * rec.overlap;
    rec.mid = report.gap_bar * rec.overlap;
    rec.theta = report.theta;
    rec.dist = report.subspace_distance;
    rec.rhs = (1.0 - rec.dist) * report.gap_bar;
    const double t = tol * std::max(1.0, report.gap_bar);
    rec.lower_pass = rec.lhs <= rec.mid + t && rec.mid <= rec.theta + t;
    rec.upper_pass = rec.theta <= rec.rhs + t;
    rec.pass = rec.lower_pass && rec.upper_pass;
    return rec;
}

double a_epsilon(double eps, double lambda0, double norm_C)
{
    return (1.0 - eps) * (1.0 - eps) * (1.0 / lambda0 - eps * norm_C * (2.0 + eps));
}

double schatten_b(double p)
{
    if (!(p > 0.0)) {
        throw Error(ErrorKind::UnsupportedP, "Schatten exponent must be positive");
    }
    if (p <= 1.0) {
        return 0.0;
    }
    if (p == 2.0) {
        return 0.5;
    }
    return kNaN;
}

double schatten_a(double p, bool* approximate)
{
    if (!(p > 0.0)) {
        throw Error(ErrorKind::UnsupportedP, "Schatten exponent must be positive");
    }
    if (approximate != nullptr) {
        *approximate = false;
    }
    if (p == 1.0) {
        return 1.0;
    }
    if (p == 2.0) {
        return 0.5;
    }
    if (approximate != nullptr) {
        *approximate = true;
    }
    const int terms = static_cast<int>(std::ceil(p)) - 1;
    auto value = [&](Complex z) {
        Complex poly = 0.0;
        Complex power = 1.0;
        for (int j = 1; j <= terms; ++j) {
            power *= -z;
            poly += power / static_cast<double>(j);
        }
        return (std::log(std::abs(1.0 + z)) + poly.real()) / std::pow(std::abs(z), p);
    };
    // polar grid, log-spaced radii; z = -1 is a removable -inf and never the maximizer
    double best = -std::numeric_limits<double>::infinity();
    constexpr int n_r = 800;
    constexpr int n_t = 720;
    for (int i = 0; i < n_r; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / (n_r - 1));
        for (int k = 0; k < n_t; ++k) {
            const double t = 2.0 * std::numbers::pi * (k + 0.5) / n_t;
            const double v = value(std::polar(r, t));
            if (std::isfinite(v)) {
                best = std::max(best, v);
            }
        }
    }
    return best;
}

DenseOperator principal_projector(const SpectralReport& report)
{
    const Eigen::VectorXd& d = report.space.weights();
    const double denom = report.space.dot(report.u1, report.u1_adjoint);
    Eigen::MatrixXd e = report.u1 * d.cwiseProduct(report.u1_adjoint).transpose() / denom;
    return {std::move(e), report.space};
}

ConstantBudget newton_constants(double norm_C, double lambda0, double theta)
{
    if (!(norm_C > 0.0 && lambda0 > 0.0 && theta > 0.0)) {
        throw Error(ErrorKind::DegenerateGap, "Newton constants need positive |C|, lambda0 and theta");
    }
    ConstantBudget b;
    const double nc = norm_C;
    const double lam = lambda0;
    const double th = theta;
    b.norm_C = nc;
    b.lambda0 = lam;
    b.theta = th;
    b.M_lambda = 1.0 + lam * nc;
    b.M_bar = 1.0 + lam * nc + th / 4.0;

    const double mt = 1.0 + b.M_lambda / th;
    b.beta = std::sqrt(std::pow(1.0 / th + 0.5 * mt, 2) + 0.25 * mt * mt * std::pow(1.0 + b.M_lambda / 2.0, 2));
    b.tau = std::min({1.0 / (8.0 * nc), 2.0 * th / (25.0 * (1.0 + lam * nc + th / 4.0) * nc), th / (25.0 * b.M_bar)});
    const double r = 2.0 * lam / (2.0 * lam - b.tau);
    const double k = 1.0 + 4.0 * b.M_bar / th;
    b.beta_bar = std::sqrt(16.0 / (th * th) + r * r * k * k) +
                 r * k * std::sqrt(1.0 + b.M_bar * 4.0 * lam * lam / std::pow(2.0 * lam - b.tau, 2));
    b.gamma = std::sqrt(2.0) * nc;
    b.lambda_radius = th / (4.0 * nc);
    b.omega = std::min({b.tau, b.lambda_radius, 1.0 / (3.0 * b.beta_bar * b.gamma)});
    b.eps0 = 1.0 / (16.0 * nc * lam);
    b.a_eps0 = a_epsilon(b.eps0, lam, nc);
    b.C_bar = lam * nc;
    {
        // block bound on |DR(u, nu)| over the neighbourhood, gauge 2: |u0| = sqrt(2)/mu1
        const double u_max = std::sqrt(2.0) * lam + b.tau;
        const double nu_max = lam + b.lambda_radius;
        b.C_residual = std::sqrt(std::pow(1.0 + nu_max * nc, 2) + std::pow(nc * u_max, 2) +
                                 std::pow(nc * nc * u_max, 2));
    }
    b.eps1 = std::min(3.0, 8.0 * th / (25.0 * b.M_bar)) / (8.0 * b.C_bar);

    return b;
}

ConstantBudget constant_budget(const SpectralReport& report, const DenseOperator& a, BudgetParams params)
{
    if (!(params.p > 0.0)) {
        throw Error(ErrorKind::UnsupportedP, "Schatten exponent must be positive");
    }
    if (!(params.beta > 0.0 && params.beta < 1.0)) {
        throw Error(ErrorKind::InvalidOptics, "beta must lie in (0, 1)");
    }
    ConstantBudget b = newton_constants(report.norm_C, report.lambda0, report.theta);
    b.beta_power = params.beta;
    const double mu2 = std::abs(report.mu2);
    b.eps_power = params.beta * report.mu1 * report.gap;
    b.delta_bar = (mu2 + b.eps_power) / report.mu1;

    b.p = params.p;
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(to_euclidean(a)).singularValues();
    b.schatten_norm = std::pow(sv.array().pow(params.p).sum(), 1.0 / params.p);
    b.a_p = schatten_a(params.p, &b.a_p_approximate);
    b.b_p = schatten_b(params.p);
    const double expo = std::pow(2.0, params.p + 1.0 + std::max(params.p - 1.0, 0.0));
    b.log_M_schatten = std::log((mu2 + b.eps_power) / b.eps_power) +
                       expo * b.a_p * std::pow(b.schatten_norm / b.eps_power, params.p) + b.b_p;
    const double log_rate = -std::log(b.delta_bar);
    b.ell0 = std::isfinite(b.log_M_schatten) ? std::max(0.0, std::ceil(b.log_M_schatten / log_rate)) : kNaN;

    // sampled max of |R(z)(I - E1)| on |z| = |mu2| + eps
    const Eigen::Index n = a.dim();
    const DenseOperator e1 = principal_projector(report);
    const Eigen::VectorXd s = a.space.weights().cwiseSqrt();
    const Eigen::MatrixXcd ae = to_euclidean(a).cast<Complex>();
    const Eigen::MatrixXcd rest =
        (Eigen::MatrixXd::Identity(n, n) - to_euclidean(e1)).cast<Complex>();
    const double radius = mu2 + b.eps_power;
    double worst = 0.0;
    for (int j = 0; j < params.resolvent_samples; ++j) {
        const Complex z = std::polar(radius, 2.0 * std::numbers::pi * j / params.resolvent_samples);
        const Eigen::MatrixXcd shifted = z * Eigen::MatrixXcd::Identity(n, n) - ae;
        const Eigen::MatrixXcd x = shifted.partialPivLu().solve(rest);
        worst = std::max(worst, Eigen::BDCSVD<Eigen::MatrixXcd>(x).singularValues()(0));
    }
    b.resolvent_max = worst;
    b.ell0_resolvent = std::max(0.0, std::ceil(std::log(radius * worst) / log_rate));

    b.norm_E1 = weighted_norm(e1);
    DenseOperator er{Eigen::MatrixXd::Identity(n, n) - e1.matrix, a.space};
    b.norm_E_rest = weighted_norm(er);
    b.c1 = 1.0 / (b.norm_E1 + b.norm_E_rest);
    b.C1 = 1.0;
    return b;
}

EigenIterate oracle_pair(const SpectralReport& report, double gauge_sq)
{
    EigenIterate it;
    it.u = report.u1 * (std::sqrt(gauge_sq) / report.mu1);
    it.lambda = report.lambda0;
    it.gauge_sq = gauge_sq;
    return it;
}

Eigen::MatrixXd dense_DR(const DenseOperator& a, const StateField& u, double nu, double gauge_sq,
                         bool exact_derivative)
{
    const Eigen::Index n = a.dim();
    const Eigen::VectorXd& d = a.space.weights();
    const StateField cu = a.matrix * u;
    Eigen::MatrixXd dr = Eigen::MatrixXd::Zero(n + 1, n + 1);
    dr.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - nu * a.matrix;
    dr.topRightCorner(n, 1) = -cu;
    if (exact_derivative) {
        const StateField h = (2.0 / gauge_sq) * (weighted_adjoint(a).matrix * cu);
        dr.bottomLeftCorner(1, n) = -d.cwiseProduct(h).transpose();
    } else {
        dr.bottomLeftCorner(1, n) = -d.cwiseProduct(cu).transpose();
    }
    return dr;
}

double dr_inverse_norm(const DenseOperator& a, const StateField& u, double nu, double gauge_sq,
                       bool exact_derivative)
{
    const Eigen::Index n = a.dim();
    Eigen::VectorXd p(n + 1);
    p.head(n) = a.space.weights().cwiseSqrt();
    p[n] = 1.0;
    const Eigen::MatrixXd dre =
        p.asDiagonal() * dense_DR(a, u, nu, gauge_sq, exact_derivative) * p.cwiseInverse().asDiagonal();
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(dre).singularValues();
    return 1.0 / sv(n);
}

DRBoundCheck verify_DR_bound(const SpectralReport& report, const ConstantBudget& budget, const DenseOperator& a,
                             std::size_t n_samples, std::uint64_t seed, double gauge_sq)
{
    const EigenIterate sol = oracle_pair(report, gauge_sq);
    const Eigen::Index n = a.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    DRBoundCheck out;
    out.at_solution = dr_inverse_norm(a, sol.u, sol.lambda, gauge_sq);
    out.worst = out.at_solution;
    for (std::size_t s = 0; s < n_samples; ++s) {
        StateField d(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            d[j] = gauss(rng);
        }
        d /= a.space.norm(d);
        const StateField u = sol.u + budget.tau * unif(rng) * d;
        const double nu = sol.lambda + budget.lambda_radius * (2.0 * unif(rng) - 1.0);
        out.worst = std::max(out.worst, dr_inverse_norm(a, u, nu, gauge_sq));
        ++out.samples;
    }
    out.worst_ratio = out.worst / budget.beta_bar;
    out.pass = out.worst <= budget.beta_bar;
    return out;
}

DenseOperator riesz_projection(const DenseOperator& a, const ContourSpec& spec, const SpectralReport* report)
{
    const Eigen::Index n = a.dim();
    std::vector<Complex> eigs;
    if (report != nullptr) {
        eigs = report->eigenvalues;
    } else {
        const Eigen::VectorXcd v = a.matrix.eigenvalues();
        eigs.assign(v.data(), v.data() + v.size());
    }
    for (Complex mu : eigs) {
        if (std::abs(std::abs(mu - spec.center()) - spec.radius()) <= 1e-6 * spec.radius()) {
            throw Error(ErrorKind::ContourHitsSpectrum, "an eigenvalue lies on the contour");
        }
    }
    const Eigen::MatrixXcd ac = a.matrix.cast<Complex>();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t j = 0; j < spec.n_nodes(); ++j) {
        const Complex z = spec.node(j);
        e += spec.weight(j) * Eigen::MatrixXcd((z * id - ac).partialPivLu().inverse());
    }
    const double re = e.real().cwiseAbs().maxCoeff();
    const double im = e.imag().cwiseAbs().maxCoeff();
    if (im > 1e-8 * std::max(1.0, re)) {
        throw Error(ErrorKind::ImaginaryResidue, "projector has imaginary part " + std::to_string(im));
    }
    return {e.real(), a.space};
}

}  // namespace certeig
