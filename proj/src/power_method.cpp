#include "certeig/power_method.hpp"

#include <algorithm>
#include <cmath>

#include "certeig/errors.hpp"

namespace certeig {

PowerStep power_step(const CertifiedOperator& c, const StateField& a, double eta_apply)
{
    const WeightedSpace& space = c.space();
    CertifiedResult b = c.apply(a, eta_apply);
    PowerStep out;
    out.image_norm = space.norm(b.value);
    out.apply_bound = b.bound;
    if (!(out.image_norm > eta_apply)) {
        throw Error(ErrorKind::ZeroImage, "image norm does not exceed the apply tolerance");
    }
    out.rayleigh = space.dot(b.value, a);
    out.next = b.value / out.image_norm;
    return out;
}

PowerTrace run_power(const CertifiedOperator& c, const StateField& a0, double target, const PowerPolicy& policy,
                     bool record_iterates, const std::function<void(const PowerRow&)>& on_row)
{
    const WeightedSpace& space = c.space();
    const double n0 = space.norm(a0);
    if (!(n0 > 0.0)) {
        throw Error(ErrorKind::ZeroImage, "initial vector is zero");
    }
    PowerTrace trace;
    trace.initial = a0 / n0;
    StateField a = trace.initial;
    double eta = policy.fixed_eta > 0.0 ? policy.fixed_eta : policy.initial_eta;
    std::uint64_t applications = 0;

    for (std::size_t n = 0; n < policy.max_steps; ++n) {
        PowerStep s = power_step(c, a, eta);
        ++applications;
        PowerRow row;
        row.step = n;
        row.rayleigh = s.rayleigh;
        row.increment = space.norm(StateField(s.next - a));
        row.eta_apply = eta;
        row.c_applications = applications;
        double q = 0.0;
        if (!trace.rows.empty() && trace.rows.back().increment > 0.0) {
            q = std::clamp(row.increment / trace.rows.back().increment, 0.0, 0.95);
        }
        row.distance_estimate = row.increment / (1.0 - q);
        trace.rows.push_back(row);
        if (on_row) {
            on_row(row);
        }
        a = std::move(s.next);
        if (record_iterates) {
            trace.iterates.push_back(a);
        }
        if (row.distance_estimate <= target) {
            trace.converged = true;
            break;
        }
        const std::size_t w = policy.stagnation_window;
        if (w > 0 && trace.rows.size() > w) {
            const double before = trace.rows[trace.rows.size() - 1 - w].increment;
            double best = row.increment;
            for (std::size_t j = trace.rows.size() - w; j < trace.rows.size(); ++j) {
                best = std::min(best, trace.rows[j].increment);
            }
            if (best >= before) {
                throw Error(ErrorKind::Stagnation, "power increments stopped decreasing");
            }
        }
        if (policy.fixed_eta <= 0.0) {
            eta = std::max(policy.eta_floor, policy.c_pow * row.increment * std::abs(row.rayleigh));
        }
    }
    trace.final_iterate = a;
    return trace;
}

NormInterval estimate_norm_C(const CertifiedOperator& c, double eta, std::size_t n_steps, double upper_bound,
                             const StateField* start)
{
    const WeightedSpace& space = c.space();
    StateField x = start != nullptr ? *start : StateField::Ones(static_cast<Eigen::Index>(c.dim()));
    x /= space.norm(x);
    NormInterval out;
    out.hi = upper_bound;
    for (std::size_t s = 0; s <= std::max<std::size_t>(n_steps, 1); ++s) {
        const CertifiedResult cx = c.apply(x, eta);
        out.lo = std::max(out.lo, space.norm(cx.value) - cx.bound);
        if (s == std::max<std::size_t>(n_steps, 1)) {
            break;
        }
        const CertifiedResult y = c.apply_adjoint(cx.value, eta);
        const double ny = space.norm(y.value);
        if (!(ny > 0.0)) {
            break;
        }
        x = y.value / ny;
    }
    return out;
}

double transport_norm_upper_bound(const AssumptionReport& report)
{
    return report.M * std::sqrt(report.sigma_max / report.sigma_min) / report.alpha;
}

GapEstimate estimate_gap(const PowerTrace& trace)
{
    if (trace.rows.size() < 4) {
        throw Error(ErrorKind::InsufficientData, "gap estimate needs at least 4 power steps");
    }
    GapEstimate out;
    constexpr double floor = 1e-13;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& row : trace.rows) {
        if (row.increment > floor) {
            xs.push_back(static_cast<double>(row.step));
            ys.push_back(std::log(row.increment));
        }
    }
    if (xs.size() < 2) {
        out.gap = 1.0;
        out.q_hat = 0.0;
        out.used = xs.size();
        return out;
    }
    // fit the later half, where the dominant rate has taken over
    const std::size_t first = xs.size() >= 6 ? xs.size() / 2 : 0;
    const auto m = static_cast<double>(xs.size() - first);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t j = first; j < xs.size(); ++j) {
        sx += xs[j];
        sy += ys[j];
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = first; j < xs.size(); ++j) {
        sxy += (xs[j] - mx) * (ys[j] - my);
        sxx += (xs[j] - mx) * (xs[j] - mx);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    out.q_hat = std::clamp(std::exp(slope), 0.0, 1.0);
    out.gap = std::clamp(1.0 - out.q_hat, 0.0, 1.0);
    out.used = xs.size() - first;
    return out;
}

}  // namespace certeig
