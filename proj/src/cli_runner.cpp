#include "certeig/cli_runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>

#include <Eigen/LU>
#include <json.hpp>

#include "certeig/errors.hpp"
#include "certeig/newton_solver.hpp"
#include "certeig/power_method.hpp"
#include "certeig/scenario.hpp"
#include "certeig/source_solver.hpp"
#include "certeig/spectral_diagnostics.hpp"
#include "certeig/transport_ops.hpp"

namespace certeig {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json num(double x)
{
    if (std::isfinite(x)) {
        return x;
    }
    return nullptr;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Trace {
public:
    Trace(const fs::path& path, bool timing)
        : out_(path), timing_(timing), start_(std::chrono::steady_clock::now())
    {
        if (!out_) {
            throw Error(ErrorKind::ParseError, "cannot write " + path.string());
        }
    }

    void row(std::string_view phase, std::size_t iter, double lambda, double rayleigh, double residual_norm,
             double eta, double certified_bound, double oracle_error, std::uint64_t c_applications)
    {
        json j;
        j["phase"] = phase;
        j["iter"] = iter;
        j["lambda"] = num(lambda);
        j["rayleigh"] = num(rayleigh);
        j["residual_norm"] = num(residual_norm);
        j["eta"] = num(eta);
        j["certified_bound"] = num(certified_bound);
        j["oracle_error"] = num(oracle_error);
        j["c_applications"] = c_applications;
        j["wallclock_ms"] = timing_ ? std::chrono::duration<double, std::milli>(
                                          std::chrono::steady_clock::now() - start_)
                                          .count()
                                    : 0.0;
        out_ << j.dump() << '\n';
        ++rows_;
    }

    std::size_t rows() const { return rows_; }

private:
    std::ofstream out_;
    bool timing_;
    std::chrono::steady_clock::time_point start_;
    std::size_t rows_ = 0;
};

Scenario resolve_scenario(const RunConfig& cfg)
{
    constexpr std::string_view prefix = "builtin:";
    Scenario sc = cfg.scenario.rfind(prefix, 0) == 0 ? builtin_scenario(cfg.scenario.substr(prefix.size()))
                                                     : load_scenario(cfg.scenario);
    if (cfg.schedule) {
        sc.newton.schedule = *cfg.schedule;
    }
    if (cfg.zeta) {
        sc.newton.zeta = *cfg.zeta;
    }
    if (cfg.target) {
        sc.newton.target = *cfg.target;
    }
    return sc;
}

json assumptions_json(const AssumptionReport& r)
{
    return json{{"alpha", r.alpha},
                {"M", r.M},
                {"c_f", r.c_f},
                {"rho", r.rho},
                {"sigma_min", r.sigma_min},
                {"sigma_max", r.sigma_max},
                {"accretive", r.accretive},
                {"fission_positive", r.fission_positive},
                {"contractive", r.contractive}};
}

json report_json(const SpectralReport& r)
{
    json eig = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(6, r.eigenvalues.size()); ++i) {
        eig.push_back(json::array({r.eigenvalues[i].real(), r.eigenvalues[i].imag()}));
    }
    return json{{"mu1", r.mu1},
                {"lambda0", r.lambda0},
                {"mu1_simple", r.mu1_simple},
                {"u1_min_entry", r.u1_min_entry},
                {"mu2", json::array({r.mu2.real(), r.mu2.imag()})},
                {"gap", r.gap},
                {"gap_bar", r.gap_bar},
                {"theta", r.theta},
                {"norm_C", r.norm_C},
                {"subspace_distance", r.subspace_distance},
                {"leading_eigenvalues", eig}};
}

json budget_json(const ConstantBudget& b)
{
    return json{{"norm_C", b.norm_C},
                {"lambda0", b.lambda0},
                {"theta", b.theta},
                {"M_lambda", b.M_lambda},
                {"M_bar", b.M_bar},
                {"beta", b.beta},
                {"tau", b.tau},
                {"beta_bar", b.beta_bar},
                {"gamma", b.gamma},
                {"lambda_radius", b.lambda_radius},
                {"omega", b.omega},
                {"eps0", num(b.eps0)},
                {"a_eps0", num(b.a_eps0)},
                {"C_bar", b.C_bar},
                {"C_residual", b.C_residual},
                {"eps1", b.eps1}};
}

// Newton constants plus the power / Schatten part filled in by constant_budget.
json full_budget_json(const ConstantBudget& b)
{
    json j = budget_json(b);
    j.update(json{{"beta_power", num(b.beta_power)},
                {"eps_power", num(b.eps_power)},
                {"delta_bar", num(b.delta_bar)},
                {"p", num(b.p)},
                {"schatten_norm", num(b.schatten_norm)},
                {"a_p", num(b.a_p)},
                {"b_p", num(b.b_p)},
                {"a_p_approximate", b.a_p_approximate},
                {"log_M_schatten", num(b.log_M_schatten)},
                {"ell0", num(b.ell0)},
                {"resolvent_max", num(b.resolvent_max)},
                {"ell0_resolvent", num(b.ell0_resolvent)},
                {"norm_E1", num(b.norm_E1)},
                {"norm_E_rest", num(b.norm_E_rest)},
                {"c1", num(b.c1)},
                {"C1", num(b.C1)}});
    return j;
}

// Everything a run needs; the dense oracle is built on demand.
struct Session {
    const RunConfig& cfg;
    Scenario sc;
    OperatorSet ops;
    std::unique_ptr<SourceSolver> solver;
    std::unique_ptr<TransportC> c;
    std::optional<DenseOperator> dense;
    std::optional<SpectralReport> report;
    std::optional<EigenIterate> oracle_pair_u;
    Trace trace;
    json summary;

    Session(const RunConfig& config, Scenario scenario)
        : cfg(config), sc(std::move(scenario)), ops(sc.grid, sc.optics, ExecPolicy{config.threads}),
          trace(fs::path(config.out_dir) / "trace.jsonl", config.timing)
    {
    }

    const TransportC& op()
    {
        if (!c) {
            solver = std::make_unique<SourceSolver>(ops);
            c = std::make_unique<TransportC>(*solver);
        }
        return *c;
    }

    const SpectralReport& oracle()
    {
        if (!report) {
            dense = materialize(ops, Op::C);
            report = dense_eigendecompose(*dense);
            oracle_pair_u = oracle_pair(*report);
        }
        return *report;
    }

    double power_oracle_error(const StateField& a)
    {
        if (!cfg.oracle) {
            return kNaN;
        }
        const StateField& u1 = oracle().u1;
        const WeightedSpace& s = ops.space();
        return std::min(s.norm(StateField(a - u1)), s.norm(StateField(a + u1)));
    }

    double newton_oracle_error(const EigenIterate& it)
    {
        if (!cfg.oracle) {
            return kNaN;
        }
        oracle();
        return product_distance(ops.space(), it, *oracle_pair_u);
    }
};

StateField start_vector(const Session& s)
{
    StateField a = StateField::Ones(static_cast<Eigen::Index>(s.ops.size()));
    return a / s.ops.space().norm(a);
}

// Power iteration to the given distance target (or for max_steps steps), written to the trace.
PowerTrace power_phase(Session& s, double target, std::size_t max_steps)
{
    const TransportC& c = s.op();
    PowerPolicy policy;
    policy.c_pow = s.sc.power.c_pow;
    policy.max_steps = max_steps;
    PowerTrace pt = run_power(c, start_vector(s), target, policy, true);
    for (std::size_t i = 0; i < pt.rows.size(); ++i) {
        const PowerRow& r = pt.rows[i];
        s.trace.row("power", r.step, 1.0 / r.rayleigh, r.rayleigh, kNaN, r.eta_apply, kNaN,
                    s.power_oracle_error(pt.iterates[i]), r.c_applications);
    }
    return pt;
}

json power_json(const PowerTrace& pt)
{
    const PowerRow& last = pt.rows.back();
    json j{{"steps", pt.rows.size()},
           {"rayleigh", last.rayleigh},
           {"lambda", 1.0 / last.rayleigh},
           {"distance_estimate", last.distance_estimate},
           {"converged", pt.converged}};
    if (pt.rows.size() >= 4) {
        const GapEstimate g = estimate_gap(pt);
        j["gap_estimate"] = g.gap;
        j["gap_certified"] = g.certified;
    }
    return j;
}

EigenIterate gauge_initial(const TransportC& c, const StateField& a, double rayleigh)
{
    const CertifiedResult ca = c.apply(a, 1e-12);
    const double n = c.space().norm(ca.value);
    if (!(n > 0.0)) {
        throw Error(ErrorKind::ZeroImage, "C vanishes on the warm-up iterate");
    }
    return EigenIterate{a * (std::sqrt(2.0) / n), 1.0 / rayleigh, 2.0};
}

ToleranceSchedule make_schedule(const NewtonConfig& nc, const ConstantBudget& b)
{
    if (nc.schedule == "quad") {
        return QuadraticSchedule{b.omega, b.beta_bar, b.gamma};
    }
    if (nc.schedule == "lin") {
        return LinearSchedule{b.omega, nc.zeta};
    }
    if (nc.schedule == "hybrid") {
        return HybridSchedule{LinearSchedule{b.omega, nc.zeta}, QuadraticSchedule{b.omega, b.beta_bar, b.gamma},
                              b.omega / 4.0};
    }
    throw Error(ErrorKind::ParseError, "unknown schedule '" + nc.schedule + "' (quad, lin, hybrid)");
}

UpdateBackend make_backend(const std::string& name)
{
    if (name == "descent") {
        return UpdateBackend::descent;
    }
    if (name == "oracle") {
        return UpdateBackend::oracle;
    }
    throw Error(ErrorKind::ParseError, "unknown Newton backend '" + name + "' (descent, oracle)");
}

// Newton constants: from the dense oracle when available, else from conservative estimates
// (upper bound for |C|, half the fitted gap for theta). The latter are not certified.
ConstantBudget newton_budget(Session& s, const PowerTrace& warm)
{
    if (s.cfg.oracle) {
        const SpectralReport& r = s.oracle();
        return newton_constants(r.norm_C, r.lambda0, r.theta);
    }
    const double hi = transport_norm_upper_bound(s.ops.assumptions());
    const double gap = warm.rows.size() >= 4 ? estimate_gap(warm).gap : 0.5;
    return newton_constants(hi, 1.0 / warm.rows.back().rayleigh, 0.5 * std::max(gap, 1e-3));
}

void newton_phase(Session& s, const PowerTrace& warm, const NewtonConfig& nc)
{
    const TransportC& c = s.op();
    const ConstantBudget b = newton_budget(s, warm);
    const ToleranceSchedule schedule = make_schedule(nc, b);
    const UpdateBackend backend = make_backend(nc.backend);
    if (backend == UpdateBackend::oracle) {
        s.oracle();
    }
    NewtonOptions opt;
    opt.beta_hat = b.beta_bar;
    opt.descent.norm_bound = b.norm_C;
    opt.dense = s.dense ? &*s.dense : nullptr;
    if (s.cfg.oracle) {
        opt.oracle_error = [&s](const EigenIterate& it) { return s.newton_oracle_error(it); };
    }
    const EigenIterate init = gauge_initial(c, warm.final_iterate, warm.rows.back().rayleigh);
    std::uint64_t total = c.applications();
    const NewtonTrace nt = run_newton(c, init, schedule, nc.target, backend, opt, [&](const NewtonRow& r) {
        total += r.c_applications;
        s.trace.row("newton", r.step, r.lambda, 1.0 / r.lambda, r.residual_norm, r.eta, r.error_estimate,
                    r.oracle_error, total);
    });
    const NewtonRow& last = nt.rows.back();
    s.summary["final"] = json{{"lambda", last.lambda}, {"error_estimate", last.error_estimate}};
    s.summary["newton"] = json{{"steps", nt.rows.size() - 1},
                               {"schedule", nc.schedule},
                               {"backend", nc.backend},
                               {"target", nc.target},
                               {"converged", nt.converged},
                               {"budget_source", s.cfg.oracle ? "oracle" : "estimate"}};
    s.summary["budget"] = budget_json(b);
    if (s.cfg.oracle) {
        s.summary["oracle"] = report_json(*s.report);
        s.summary["oracle"]["product_error"] = last.oracle_error;
        s.summary["oracle"]["lambda_error"] = std::abs(last.lambda - s.report->lambda0);
    }
    if (!nt.converged) {
        throw Error(ErrorKind::IterationCap, "Newton did not reach the target");
    }
}

void run_check(Session& s, std::ostream& log)
{
    const AssumptionReport& r = s.ops.assumptions();
    s.summary["final"] = json{{"lambda", nullptr}, {"error_estimate", nullptr}};
    s.summary["assumptions"] = assumptions_json(r);
    log << "alpha=" << r.alpha << " M=" << r.M << " rho=" << r.rho << (r.pass() ? " ok" : " FAILED") << '\n';
    if (!r.pass()) {
        throw Error(r.contractive ? ErrorKind::InvalidOptics : ErrorKind::NotContractive,
                    "transport assumptions do not hold");
    }
}

void run_source(Session& s, std::ostream& log)
{
    const double eta = s.cfg.target.value_or(1e-10);
    std::mt19937_64 rng(s.cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    StateField q(static_cast<Eigen::Index>(s.ops.size()));
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        q[i] = uni(rng);
    }
    s.op();
    const CertifiedResult r = s.solver->solve_B(q, eta);
    double err = kNaN;
    if (s.cfg.oracle) {
        const DenseOperator b = materialize(s.ops, Op::B);
        const StateField exact = b.matrix.partialPivLu().solve(q);
        err = s.ops.space().norm(StateField(r.value - exact));
    }
    s.trace.row("source", r.iterations, kNaN, kNaN, kNaN, eta, r.bound, err, 0);
    s.summary["final"] = json{{"lambda", nullptr}, {"error_estimate", r.bound}};
    s.summary["source"] = json{{"eta", eta}, {"iterations", r.iterations}, {"bound", r.bound},
                               {"rho", s.solver->rho()}};
    if (s.cfg.oracle) {
        s.summary["oracle"] = json{{"error", err}};
    }
    log << "source solve: " << r.iterations << " iterations, bound " << r.bound << '\n';
}

void run_power_cmd(Session& s, std::ostream& log)
{
    const double target = s.cfg.target.value_or(1e-6);
    const PowerTrace pt = power_phase(s, target, s.sc.power.max_steps);
    s.summary["final"] = json{{"lambda", 1.0 / pt.rows.back().rayleigh},
                              {"error_estimate", pt.rows.back().distance_estimate}};
    s.summary["power"] = power_json(pt);
    const NormInterval ni =
        estimate_norm_C(s.op(), 1e-10, 10, transport_norm_upper_bound(s.ops.assumptions()));
    s.summary["power"]["norm_C_interval"] = json::array({ni.lo, ni.hi});
    if (s.cfg.oracle) {
        s.summary["oracle"] = report_json(s.oracle());
        s.summary["oracle"]["distance"] = s.power_oracle_error(pt.final_iterate);
    }
    log << "power: " << pt.rows.size() << " steps, rayleigh " << pt.rows.back().rayleigh << '\n';
    if (!pt.converged) {
        throw Error(ErrorKind::IterationCap, "power iteration did not reach the target");
    }
}

void run_newton_cmd(Session& s, std::ostream& log)
{
    const PowerTrace warm = power_phase(s, 0.0, s.sc.power.warmup);
    s.summary["power"] = power_json(warm);
    newton_phase(s, warm, s.sc.newton);
    log << "newton: lambda " << s.summary["final"]["lambda"].get<double>() << ", error estimate "
        << s.summary["final"]["error_estimate"].get<double>() << '\n';
}

// Warm-up until the iterate is inside omega (oracle) or for the fixed count, then the hybrid
// schedule: linear until ehat <= omega/4, quadratic after.
void run_pipeline(Session& s, std::ostream& log)
{
    PowerTrace warm;
    if (s.cfg.oracle) {
        const SpectralReport& r = s.oracle();
        const ConstantBudget b = newton_constants(r.norm_C, r.lambda0, r.theta);
        // product error of the gauged iterate per unit distance of the power iterate
        const double lam = r.lambda0;
        const double k = std::sqrt(2.0) * lam + (std::sqrt(2.0) + 1.0) * lam * lam * (r.mu1 + r.norm_C);
        warm = power_phase(s, b.omega / (4.0 * k), s.sc.power.max_steps);
    } else {
        warm = power_phase(s, 0.0, s.sc.power.warmup);
    }
    s.summary["power"] = power_json(warm);
    NewtonConfig nc = s.sc.newton;
    if (!s.cfg.schedule) {
        nc.schedule = "hybrid";
    }
    newton_phase(s, warm, nc);
    log << "pipeline: lambda " << s.summary["final"]["lambda"].get<double>() << ", error estimate "
        << s.summary["final"]["error_estimate"].get<double>() << '\n';
}

void run_diagnose(Session& s, std::ostream& log)
{
    const SpectralReport& r = s.oracle();
    const ConstantBudget b = constant_budget(r, *s.dense);
    const SandwichRecord sw = sandwich_check(r);
    const DRBoundCheck dr = verify_DR_bound(r, b, *s.dense, 100, s.cfg.seed);
    const DenseOperator e1 = principal_projector(r);
    const double idem = weighted_norm(DenseOperator{e1.matrix * e1.matrix - e1.matrix, e1.space});
    s.summary["final"] = json{{"lambda", r.lambda0}, {"error_estimate", nullptr}};
    s.summary["oracle"] = report_json(r);
    s.summary["budget"] = full_budget_json(b);
    s.summary["sandwich"] = json{{"lhs", sw.lhs}, {"mid", sw.mid}, {"theta", sw.theta}, {"rhs", sw.rhs},
                                 {"dist", sw.dist}, {"lower_pass", sw.lower_pass}, {"upper_pass", sw.upper_pass}};
    s.summary["dr_bound"] = json{{"samples", dr.samples}, {"worst", dr.worst}, {"beta_bar", b.beta_bar},
                                 {"at_solution", dr.at_solution}, {"pass", dr.pass}};
    s.summary["projector_idempotency"] = idem;
    log << "mu1=" << r.mu1 << " lambda0=" << r.lambda0 << " gap=" << r.gap << " theta=" << r.theta
        << " beta_bar=" << b.beta_bar << " omega=" << b.omega << '\n';
}

void run_oracle(Session& s, std::ostream& log)
{
    const SpectralReport& r = s.oracle();
    s.summary["final"] = json{{"lambda", r.lambda0}, {"error_estimate", nullptr}};
    s.summary["oracle"] = report_json(r);
    std::ofstream u(fs::path(s.cfg.out_dir) / "oracle_u.csv");
    u << "cell,ordinate,mu,u\n";
    u.precision(17);
    const EigenIterate& pair = *s.oracle_pair_u;
    for (std::size_t i = 0; i < s.ops.grid().n_cells(); ++i) {
        for (std::size_t k = 0; k < s.ops.grid().n_ordinates(); ++k) {
            u << i << ',' << k << ',' << s.ops.grid().mu(k) << ','
              << pair.u[static_cast<Eigen::Index>(s.ops.grid().index(i, k))] << '\n';
        }
    }
    log << "mu1=" << r.mu1 << " lambda0=" << r.lambda0 << " mu2=" << r.mu2.real() << "+" << r.mu2.imag()
        << "i theta=" << r.theta << '\n';
}

void write_summary(const fs::path& dir, const json& summary)
{
    std::ofstream js(dir / "summary.json");
    js << summary.dump(2) << '\n';
    std::ofstream csv(dir / "summary.csv");
    csv << "key,value\n";
    const json flat = summary.flatten();
    for (const auto& [key, value] : flat.items()) {
        csv << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
}

}  // namespace

Subcommand parse_subcommand(std::string_view name)
{
    for (Subcommand s : {Subcommand::check, Subcommand::source, Subcommand::power, Subcommand::newton,
                         Subcommand::pipeline, Subcommand::diagnose, Subcommand::oracle}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw Error(ErrorKind::ParseError, "unknown subcommand '" + std::string(name) + "'");
}

std::string_view to_string(Subcommand s)
{
    switch (s) {
    case Subcommand::check: return "check";
    case Subcommand::source: return "source";
    case Subcommand::power: return "power";
    case Subcommand::newton: return "newton";
    case Subcommand::pipeline: return "pipeline";
    case Subcommand::diagnose: return "diagnose";
    case Subcommand::oracle: return "oracle";
    }
    return "unknown";
}

int run(Subcommand subcommand, const RunConfig& cfg, std::ostream& log)
{
    const fs::path dir(cfg.out_dir);
    json record;
    int code = 0;
    try {
        fs::create_directories(dir);
        fs::remove(dir / "error.json");
        Session s(cfg, resolve_scenario(cfg));
        s.summary["subcommand"] = to_string(subcommand);
        s.summary["scenario"] = s.sc.name;
        s.summary["status"] = "ok";
        s.summary["seed"] = cfg.seed;
        s.summary["threads"] = cfg.threads;
        s.summary["oracle_enabled"] = cfg.oracle;
        switch (subcommand) {
        case Subcommand::check: run_check(s, log); break;
        case Subcommand::source: run_source(s, log); break;
        case Subcommand::power: run_power_cmd(s, log); break;
        case Subcommand::newton: run_newton_cmd(s, log); break;
        case Subcommand::pipeline: run_pipeline(s, log); break;
        case Subcommand::diagnose: run_diagnose(s, log); break;
        case Subcommand::oracle: run_oracle(s, log); break;
        }
        write_summary(dir, s.summary);
        return 0;
    } catch (const Error& e) {
        code = is_config_error(e.kind()) ? 2 : 1;
        record = json{{"status", "error"}, {"kind", to_string(e.kind())}, {"message", e.what()}};
    } catch (const fs::filesystem_error& e) {
        code = 2;
        record = json{{"status", "error"}, {"kind", "IoError"}, {"message", e.what()}};
    } catch (const std::exception& e) {
        code = 1;
        record = json{{"status", "error"}, {"kind", "Internal"}, {"message", e.what()}};
    }
    record["subcommand"] = to_string(subcommand);
    record["exit_code"] = code;
    log << record.dump() << '\n';
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        std::ofstream(dir / "error.json") << record.dump(2) << '\n';
    }
    return code;
}

}  // namespace certeig
