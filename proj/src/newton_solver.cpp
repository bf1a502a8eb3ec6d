#include "certeig/newton_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "certeig/errors.hpp"
#include "certeig/spectral_diagnostics.hpp"

namespace certeig {

namespace {

// C x to absolute accuracy eta * |x|: the operator is applied to the unit vector and rescaled.
StateField scaled_apply(const CertifiedOperator& c, const StateField& x, double eta, bool adjoint = false)
{
    const double n = c.space().norm(x);
    if (n == 0.0) {
        return StateField::Zero(x.size());
    }
    const StateField unit = x / n;
    return (adjoint ? c.apply_adjoint(unit, eta) : c.apply(unit, eta)).value * n;
}

StateField constraint_vector(const CertifiedOperator& c, const StateField& f, double gauge_sq, double eta,
                             JacobianForm form)
{
    if (form == JacobianForm::unscaled) {
        return f;
    }
    return (2.0 / gauge_sq) * scaled_apply(c, f, eta, true);
}

}  // namespace

Residual residual_R(const CertifiedOperator& c, const EigenIterate& it, double eta)
{
    const WeightedSpace& space = c.space();
    CertifiedResult cu = c.apply(it.u, eta);
    Residual r;
    r.r1 = it.u - it.lambda * cu.value;
    const double ncu = space.norm(cu.value);
    r.r2 = 1.0 - ncu * ncu / it.gauge_sq;
    r.norm = product_norm(space, r.r1, r.r2);
    const double b1 = std::abs(it.lambda) * cu.bound;
    const double b2 = (2.0 * ncu + cu.bound) * cu.bound / it.gauge_sq;
    r.bound = std::hypot(b1, b2);
    r.cu = std::move(cu.value);
    return r;
}

Linearization::Linearization(const CertifiedOperator& c, const EigenIterate& base, double eta, JacobianForm form)
    : Linearization(c, base, c.apply(base.u, eta).value, eta, form)
{
}

Linearization::Linearization(const CertifiedOperator& c, const EigenIterate& base, StateField f, double eta,
                             JacobianForm form)
    : c_(c), lambda_(base.lambda), f_(std::move(f))
{
    h_ = constraint_vector(c, f_, base.gauge_sq, eta, form);
}

Direction Linearization::apply(const Direction& d, double eta) const
{
    Direction out;
    out.u = d.u - lambda_ * scaled_apply(c_, d.u, eta) - d.nu * f_;
    out.nu = -c_.space().dot(h_, d.u);
    return out;
}

Direction Linearization::apply_adjoint(const Direction& r, double eta) const
{
    Direction out;
    out.u = r.u - lambda_ * scaled_apply(c_, r.u, eta, true) - r.nu * h_;
    out.nu = -c_.space().dot(f_, r.u);
    return out;
}

Direction apply_DR(const CertifiedOperator& c, const EigenIterate& base, const Direction& dir, double eta,
                   JacobianForm form)
{
    return Linearization(c, base, eta, form).apply(dir, eta);
}

DescentResult newton_update_descent(const CertifiedOperator& c, const EigenIterate& it, double eta_n,
                                    const DescentOptions& options)
{
    if (!(eta_n > 0.0)) {
        throw Error(ErrorKind::InvalidOptics, "update tolerance must be positive");
    }
    const WeightedSpace& space = c.space();
    const std::uint64_t apps0 = c.applications();
    const double target = eta_n / options.beta_hat;
    const double lam = it.lambda;
    const double nu0 = space.norm(it.u);

    // The inexact applies enter the residual amplified by roughly |lam| |w| and |C| |w|
    // (see perturbation below, w ~ u), so the apply tolerance is scaled down by that factor.
    auto amplification = [&](double norm_c, double nf) {
        const double on_r1 = std::abs(lam) * (nu0 + 1.0);
        double on_r2 = 2.0 * nf / it.gauge_sq;
        on_r2 += options.form == JacobianForm::exact ? (2.0 / it.gauge_sq) * (norm_c + nf) * nu0 : nu0;
        return std::max(1.0, std::hypot(on_r1, on_r2));
    };
    double inner = options.inner_fraction * target / std::max(1.0, std::abs(lam) * (nu0 + 1.0));
    StateField f = c.apply(it.u, inner).value;
    double nf = space.norm(f);
    {
        const double nc = options.norm_bound > 0.0 ? options.norm_bound : nf / std::max(nu0, 1e-300);
        const double scaled = options.inner_fraction * target / amplification(nc, nf);
        if (scaled < inner) {
            inner = scaled;
            f = c.apply(it.u, inner).value;
            nf = space.norm(f);
        }
    }
    const Linearization lin(c, it, f, inner, options.form);
    const StateField& h = lin.h();
    const StateField g = it.u - lam * f;
    const double s = 1.0 - nf * nf / it.gauge_sq;
    const double hh = space.dot(h, h);
    if (!(hh > 0.0)) {
        throw Error(ErrorKind::DescentStall, "constraint functional vanishes (C u = 0)");
    }
    const double norm_c =
        options.norm_bound > 0.0 ? options.norm_bound : nf / std::max(space.norm(it.u), 1e-300);

    // Start at the smallest point of the affine set <h, w> = s; the update itself is O(|R|).
    DescentResult out;
    StateField w = (s / hh) * h;
    double nu = 0.0;

    auto residual = [&](const StateField& ww, double vv) {
        Direction r = lin.apply({ww, vv}, inner);
        r.u += g;
        r.nu += s;
        return r;
    };
    // effect of the inexact applies on the residual of the exact linear system
    auto perturbation = [&](const StateField& ww, double vv) {
        const double nw = space.norm(ww);
        const double on_r1 = std::abs(lam) * (nw + 1.0) * inner + std::abs(vv) * inner;
        double on_r2 = (2.0 * nf + inner) * inner / it.gauge_sq;
        if (options.form == JacobianForm::exact) {
            on_r2 += (2.0 / it.gauge_sq) * (norm_c + nf) * inner * nw;
        } else {
            on_r2 += inner * nw;
        }
        return std::hypot(on_r1, on_r2);
    };

    Direction r = residual(w, nu);
    for (std::size_t k = 0;; ++k) {
        const double q = 0.5 * (space.dot(r.u, r.u) + r.nu * r.nu);
        out.q_history.push_back(q);
        const double achieved = std::sqrt(2.0 * q) + perturbation(w, nu);
        if (achieved <= target) {
            // confirm against a freshly evaluated residual before accepting
            r = residual(w, nu);
            const double q_fresh = 0.5 * (space.dot(r.u, r.u) + r.nu * r.nu);
            out.achieved_residual = std::sqrt(2.0 * q_fresh) + perturbation(w, nu);
            if (out.achieved_residual <= target) {
                out.iterations = k;
                break;
            }
            out.q_history.back() = q_fresh;
        }
        if (k >= options.max_iterations) {
            throw Error(ErrorKind::DescentStall, "descent iteration cap reached");
        }
        const std::size_t win = options.stall_window;
        if (win > 0 && out.q_history.size() > win) {
            const double before = out.q_history[out.q_history.size() - 1 - win];
            if (q > (1.0 - options.stall_reduction) * before) {
                throw Error(ErrorKind::DescentStall,
                            "Q reduced by less than " + std::to_string(options.stall_reduction) + " over " +
                                std::to_string(win) + " steps (Q = " + std::to_string(q) + ")");
            }
        }
        Direction d = lin.apply_adjoint(r, inner);
        d.u = -d.u;
        d.nu = -d.nu;
        d.u -= (space.dot(h, d.u) / hh) * h;
        const Direction jd = lin.apply(d, inner);
        const double jj = space.dot(jd.u, jd.u) + jd.nu * jd.nu;
        if (!(jj > 0.0)) {
            out.iterations = k;
            out.achieved_residual = achieved;
            break;
        }
        const double xi = -(space.dot(r.u, jd.u) + r.nu * jd.nu) / jj;
        w += xi * d.u;
        nu += xi * d.nu;
        r.u += xi * jd.u;
        r.nu += xi * jd.nu;
    }
    out.delta.u = w;
    out.delta.nu = nu;
    out.c_applications = c.applications() - apps0;
    return out;
}

OracleUpdate newton_update_oracle(const DenseOperator& a, const EigenIterate& it, JacobianForm form)
{
    const Eigen::Index n = a.dim();
    const WeightedSpace& space = a.space;
    OracleUpdate out;
    EigenIterate base = it;

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - base.lambda * a.matrix;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    out.shift_condition = lu.rcond();
    if (!(out.shift_condition > 1e-15)) {
        base.lambda += 1e-12 * std::max(1.0, std::abs(base.lambda));
        m = Eigen::MatrixXd::Identity(n, n) - base.lambda * a.matrix;
        lu.compute(m);
        out.shift_condition = lu.rcond();
        out.perturbed = true;
        if (!(out.shift_condition > 1e-15)) {
            throw Error(ErrorKind::SingularSystem, "M stays singular after perturbing lambda");
        }
    }

    const StateField f = a.matrix * base.u;
    const double nf = space.norm(f);
    const double s = 1.0 - nf * nf / base.gauge_sq;
    const StateField h =
        form == JacobianForm::exact ? StateField((2.0 / base.gauge_sq) * (weighted_adjoint(a).matrix * f)) : f;

    const Eigen::MatrixXd dr = dense_DR(a, base.u, base.lambda, base.gauge_sq, form == JacobianForm::exact);
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -(base.u - base.lambda * f);
    rhs[n] = -s;
    Eigen::FullPivLU<Eigen::MatrixXd> saddle(dr);
    if (!saddle.isInvertible()) {
        throw Error(ErrorKind::SingularSystem, "saddle system is singular");
    }
    const Eigen::VectorXd x = saddle.solve(rhs);
    out.delta.u = x.head(n);
    out.delta.nu = x[n];

    const StateField z = lu.solve(f);
    const double hz = space.dot(h, z);
    out.elimination.nu = (s + space.dot(h, base.u)) / hz;
    out.elimination.u = out.elimination.nu * z - base.u;
    return out;
}

void validate(const ToleranceSchedule& schedule)
{
    auto check_linear = [](const LinearSchedule& l) {
        if (!(l.omega > 0.0) || !(l.zeta > 0.0 && l.zeta < 1.0)) {
            throw Error(ErrorKind::ParseError, "linear schedule needs omega > 0 and zeta in (0, 1)");
        }
    };
    auto check_quadratic = [](const QuadraticSchedule& q) {
        if (!(q.omega > 0.0) || !(q.beta_bar > 0.0) || !(q.gamma > 0.0)) {
            throw Error(ErrorKind::ParseError, "quadratic schedule needs positive omega, beta_bar, gamma");
        }
    };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearSchedule>) {
                check_linear(s);
            } else if constexpr (std::is_same_v<T, QuadraticSchedule>) {
                check_quadratic(s);
            } else {
                check_linear(s.linear);
                check_quadratic(s.quadratic);
            }
        },
        schedule);
}

double schedule_eta(const ToleranceSchedule& schedule, double e_hat)
{
    auto quad = [&](const QuadraticSchedule& q) {
        return std::min(q.omega / 2.0, q.beta_bar * q.gamma / 2.0 * e_hat * e_hat);
    };
    auto lin = [&](const LinearSchedule& l) { return std::min(l.omega / 2.0, l.zeta / 2.0 * e_hat); };
    return std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearSchedule>) {
                return lin(s);
            } else if constexpr (std::is_same_v<T, QuadraticSchedule>) {
                return quad(s);
            } else {
                return e_hat <= s.switch_below ? quad(s.quadratic) : lin(s.linear);
            }
        },
        schedule);
}

NewtonTrace run_newton(const CertifiedOperator& c, const EigenIterate& init, const ToleranceSchedule& schedule,
                       double target, UpdateBackend backend, const NewtonOptions& options,
                       const std::function<void(const NewtonRow&)>& on_row)
{
    validate(schedule);
    if (!(target > 0.0)) {
        throw Error(ErrorKind::ParseError, "target must be positive");
    }
    if (backend == UpdateBackend::oracle && options.dense == nullptr) {
        throw Error(ErrorKind::ParseError, "the oracle backend needs a dense operator");
    }
    const WeightedSpace& space = c.space();
    DescentOptions dopt = options.descent;
    dopt.beta_hat = options.beta_hat;

    NewtonTrace trace;
    EigenIterate it = init;
    std::size_t rising = 0;
    double last_norm = -1.0;
    for (std::size_t n = 0; n <= options.max_steps; ++n) {
        const std::uint64_t apps0 = c.applications();
        // the residual bound is about max(|lambda|, sqrt(2)) times the apply tolerance
        const double eta_r =
            options.residual_fraction * target / (options.beta_hat * std::max({1.5, std::abs(it.lambda)}));
        const Residual res = residual_R(c, it, eta_r);
        NewtonRow row;
        row.step = n;
        row.lambda = it.lambda;
        row.residual_norm = res.norm;
        row.residual_bound = res.bound;
        row.error_estimate = options.beta_hat * (res.norm + res.bound);
        if (options.oracle_error) {
            row.oracle_error = options.oracle_error(it);
        }
        trace.iterates.push_back(it);
        if (row.error_estimate <= target || n == options.max_steps) {
            trace.converged = row.error_estimate <= target;
            row.c_applications = c.applications() - apps0;
            trace.rows.push_back(row);
            if (on_row) {
                on_row(row);
            }
            break;
        }
        if (last_norm >= 0.0 && res.norm > last_norm) {
            if (++rising >= 3) {
                throw Error(ErrorKind::Divergence,
                            "residual grew for 3 consecutive Newton steps; extend the power warm-up");
            }
        } else {
            rising = 0;
        }
        last_norm = res.norm;

        row.eta = schedule_eta(schedule, options.schedule_error ? options.schedule_error(it) : row.error_estimate);
        if (row.eta < options.eta_floor * target) {
            row.eta = options.eta_floor * target;
            row.eta_floored = true;
        }
        Direction delta;
        if (backend == UpdateBackend::oracle) {
            delta = newton_update_oracle(*options.dense, it, dopt.form).delta;
        } else {
            DescentResult d = newton_update_descent(c, it, row.eta, dopt);
            row.descent_iterations = d.iterations;
            delta = std::move(d.delta);
        }
        row.update_norm = product_norm(space, delta.u, delta.nu);
        it.u += delta.u;
        it.lambda += delta.nu;
        row.c_applications = c.applications() - apps0;
        trace.rows.push_back(row);
        if (on_row) {
            on_row(row);
        }
    }
    trace.final_iterate = it;
    return trace;
}

}  // namespace certeig
