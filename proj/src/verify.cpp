#include "levyspde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyspde/errors.hpp"
#include "levyspde/gronwall.hpp"
#include "levyspde/green_kernels.hpp"
#include "levyspde/malliavin.hpp"
#include "levyspde/pathwise_integrals.hpp"
#include "levyspde/quadrature.hpp"
#include "levyspde/solver.hpp"

namespace levyspde {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

template <class Fn>
std::string csv(Fn&& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

// h = 1{|x| ≤ R/2} on the window; R = 2 gives 1{x ∈ [−1, 1]}.
Integrand central_indicator(const SpaceTimeWindow& w) {
    return Integrand::indicator(w, {0.0, w.T(), -0.5 * w.R(), 0.5 * w.R()});
}

Integrand smooth_integrand(const SpaceTimeWindow& w) {
    const double T = w.T();
    return Integrand("gauss_bump", [T](double t, double x) { return std::exp(-x * x) * (1.0 + t / T); },
                     {0.0, w.T(), -w.R(), w.R()});
}

void require_exact_regime(const ProblemSpec& p, const std::string& check) {
    if (p.noise.m1() != 0.0)
        throw ConfigError(check + ": needs a jump law with m1 = 0 (got m1 = " + fmt(p.noise.m1()) + ")");
}

CheckOutcome isometry(const RunConfig& cfg) {
    const auto w = cfg.window();
    const auto noise = cfg.noise_spec();
    const auto s = isometry_test(noise, central_indicator(w), w, cfg.ensemble_size(10000), cfg.seed, cfg.workers);
    CheckOutcome out;
    out.pass = s.within(cfg.tol.z_max);
    out.summary = "E|L(h)|^2 = " + fmt(s.estimate) + " vs v*int h^2 = " + fmt(*s.target) +
                  " (z = " + fmt(*s.studentized) + ")";
    std::vector<EstimatorSummary> rows{s};
    out.tables.emplace_back("isometry", csv([&](std::ostream& os) { write_summary_csv(os, rows); }));
    return out;
}

CheckOutcome exact_identity(const RunConfig& cfg, bool exp_form) {
    const auto w = cfg.window();
    const auto noise = cfg.noise_spec();
    const auto h = smooth_integrand(w);
    const std::size_t draws = cfg.ensemble_size(100);
    const auto rep = exp_form ? exp_derivative_check(h, noise, w, draws, cfg.seed, cfg.tol.exact)
                              : chain_rule_check(h, noise, w, draws, cfg.seed, cfg.tol.exact);
    CheckOutcome out;
    out.pass = rep.pass();
    out.summary = std::to_string(draws) + " draws, worst scaled residual " + fmt(rep.worst_residual());
    out.tables.emplace_back(exp_form ? "exp_derivative" : "chain_rule",
                            csv([&](std::ostream& os) { write_check_csv(os, rep); }));
    return out;
}

CheckOutcome duality(const RunConfig& cfg) {
    const auto w = cfg.window();
    const auto noise = cfg.noise_spec();
    const auto h = central_indicator(w);
    const std::vector<Integrand> gs = {
        h,
        Integrand::indicator(w, {0.0, w.T(), 0.0, w.R()}),
        Integrand::indicator(w, {0.0, w.T(), -w.R(), -0.5 * w.R()}),
    };
    const std::size_t n = cfg.ensemble_size(10000);
    std::vector<EstimatorSummary> rows;
    CheckOutcome out;
    out.pass = true;
    for (std::size_t k = 0; k < gs.size(); ++k) {
        auto s = duality_test(h, gs[k], noise, w, n, derive_seed(cfg.seed, k), cfg.workers);
        out.pass = out.pass && s.within(cfg.tol.z_max);
        out.summary += (k ? "; " : "") + std::string("z = ") + fmt(*s.studentized);
        rows.push_back(std::move(s));
    }
    out.tables.emplace_back("duality", csv([&](std::ostream& os) { write_summary_csv(os, rows); }));
    return out;
}

CheckOutcome derivative_eq(const RunConfig& cfg) {
    const auto p = cfg.problem();
    if (!p.sigma.is_affine())
        throw ConfigError("derivative-eq: sigma `" + p.sigma.name() +
                          "` is not affine; the derivative equation is only asserted for affine sigma. "
                          "Run `verify nonlinear-probe` for a report-only comparison.");
    require_exact_regime(p, "derivative-eq");
    const std::size_t draws = cfg.ensemble_size(100);
    const auto rep = derivative_equation_check(p, draws, cfg.seed, cfg.tol.derivative);
    CheckOutcome out;
    out.pass = rep.pass();
    out.summary = std::to_string(draws) + " draws, worst residual " + fmt(rep.worst_residual());
    out.tables.emplace_back("derivative_eq", csv([&](std::ostream& os) { write_check_csv(os, rep); }));
    return out;
}

CheckOutcome nonlinear(const RunConfig& cfg) {
    const auto p = cfg.problem();
    require_exact_regime(p, "nonlinear-probe");
    const auto& w = p.window;
    CheckReport rep;
    const std::size_t draws = cfg.ensemble_size(100);
    double worst_diff = 0.0, worst_lin = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, i);
        Rng rng(seed);
        const auto config = sample_prm(p.noise, w, rng());
        auto point = random_point(p.noise, w, rng);
        while (config.has_time(point.r)) point = random_point(p.noise, w, rng);
        std::uniform_real_distribution<double> ut(point.r, w.T()), ux(-w.R(), w.R());
        const double t = ut(rng), x = ux(rng);
        const auto r = nonlinear_probe(p, config, point, t, x);
        worst_diff = std::max(worst_diff, r.residual_difference / (1.0 + std::abs(r.lhs)));
        worst_lin = std::max(worst_lin, r.residual_linearized / (1.0 + std::abs(r.lhs)));
        const std::string params = "draw=" + std::to_string(i) + ";seed=" + std::to_string(seed);
        rep.rows.push_back({"probe:difference", params, r.lhs, r.rhs_difference, r.residual_difference, true});
        rep.rows.push_back({"probe:linearized", params, r.lhs, r.rhs_linearized, r.residual_linearized, true});
    }
    CheckOutcome out;
    out.pass = true;  // report-only
    out.summary = "sigma " + p.sigma.name() + ": worst relative residual, difference form " + fmt(worst_diff) +
                  ", linearized form " + fmt(worst_lin) + " (report only)";
    out.tables.emplace_back("nonlinear_probe", csv([&](std::ostream& os) { write_check_csv(os, rep); }));
    return out;
}

CheckOutcome picard_derivative(const RunConfig& cfg) {
    const auto p = cfg.problem();
    require_exact_regime(p, "picard-derivative");
    const auto& w = p.window;
    const std::size_t draws = cfg.ensemble_size(100);
    const std::size_t iters = std::max<std::size_t>(cfg.iters, 2);
    CheckReport rep;
    double worst_first = 0.0, worst_rec = 0.0;
    std::size_t decays = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, i);
        Rng rng(seed);
        const auto config = sample_prm(p.noise, w, rng());
        auto point = random_point(p.noise, w, rng);
        while (config.has_time(point.r)) point = random_point(p.noise, w, rng);
        const auto r = picard_derivative_recursion(p, config, point, iters);
        const double rec = *std::max_element(r.recursion_residuals.begin(), r.recursion_residuals.end());
        worst_first = std::max(worst_first, r.first_iterate_residual);
        worst_rec = std::max(worst_rec, rec);
        decays += r.decay_ok ? 1 : 0;
        const std::string params = "draw=" + std::to_string(i) + ";seed=" + std::to_string(seed);
        rep.rows.push_back({"picard-derivative:n=1", params, 0.0, 0.0, r.first_iterate_residual, r.first_ok});
        rep.rows.push_back({"picard-derivative:recursion", params, 0.0, 0.0, rec, r.recursion_ok});
        rep.rows.push_back({"picard-derivative:decay", params, r.cauchy.front(), r.cauchy.back(),
                            r.cauchy.front() > 0.0 ? r.cauchy.back() / r.cauchy.front() : 0.0, r.decay_ok});
    }
    CheckOutcome out;
    out.pass = rep.pass();
    out.summary = "n=1 residual " + fmt(worst_first) + ", recursion residual " + fmt(worst_rec) + ", decay on " +
                  std::to_string(decays) + "/" + std::to_string(draws) + " draws";
    out.tables.emplace_back("picard_derivative", csv([&](std::ostream& os) { write_check_csv(os, rep); }));
    return out;
}

CheckOutcome gronwall(const RunConfig& cfg) {
    const double T = cfg.T;
    const ConvolutionKernel kernel([](double) { return 1.0; }, T, cfg.grid);
    const std::size_t n_max = 10;
    const auto seq = renewal_probabilities(kernel, n_max);
    double worst = 0.0, exact = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        exact *= T / static_cast<double>(n);
        worst = std::max(worst, std::abs(seq.a[n] / exact - 1.0));
    }
    std::vector<double> C(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) C[n] = std::ldexp(1.0, -static_cast<int>(n));
    const auto f = equality_sequence(C, kernel, 1.0);
    const auto bound = verify_bound(f, C, kernel, 1.0);
    const auto sum = summability_check(seq.a, 2.0);

    CheckOutcome out;
    const bool renewal_ok = worst <= 1e-4;
    out.pass = renewal_ok && bound.hypothesis_ok && bound.stated_ok && sum.strictly_decreasing && sum.pass;
    out.summary = "max_n |a_n n!/T^n - 1| = " + fmt(worst) + ", bound margin " + fmt(bound.worst_margin_stated) +
                  (bound.hypothesis_ok ? "" : " (hypothesis violated)") + ", ratios " +
                  (sum.strictly_decreasing ? "strictly decreasing" : "not monotone");
    out.tables.emplace_back("gronwall_renewal", csv([&](std::ostream& os) { write_renewal_csv(os, seq, sum); }));
    out.tables.emplace_back("gronwall_bound", csv([&](std::ostream& os) { write_bound_csv(os, bound); }));
    return out;
}

// Quadrature of ∫G²(t,x)dx and of ∫₀ᵗ J, independent of the closed forms.
double j_by_quadrature(const KernelModel& k, double t) {
    if (k.kind() == KernelKind::Wave) {
        const double b[] = {-t, t};
        return quad::integrate([&](double x) { const double g = k.evaluate(t, x); return g * g; },
                               -2.0 * t, 2.0 * t, b, 1e-12);
    }
    const double L = 40.0 * std::sqrt(t);
    const double b[] = {0.0};
    return quad::integrate([&](double x) { const double g = k.evaluate(t, x); return g * g; }, -L, L, b, 1e-12);
}

double nu_by_quadrature(const KernelModel& k, double t) {
    // s = u² removes the s^{-1/2} endpoint behaviour of the heat J.
    return quad::integrate([&](double u) { return 2.0 * u * j_by_quadrature(k, u * u); }, 0.0, std::sqrt(t), 1e-11);
}

CheckOutcome h2(const RunConfig& cfg) {
    CheckOutcome out;
    out.pass = true;
    std::ostringstream table;
    table.precision(17);
    table << "kernel,clause,quantity,value,pass\n";
    for (const auto kernel : {KernelModel::wave(), KernelModel::heat()}) {
        const auto rep = check_h2(kernel, cfg.T, cfg.h2_eps);
        for (const auto& r : rep.rows)
            table << kernel.name() << ',' << r.clause << ',' << r.quantity << ',' << r.value << ','
                  << (r.pass ? 1 : 0) << '\n';
        double worst = 0.0;
        for (double t : {0.1 * cfg.T, 0.5 * cfg.T, cfg.T}) {
            const double dj = std::abs(kernel.j_integral(t) - j_by_quadrature(kernel, t));
            const double dn = std::abs(kernel.nu_t(t) - nu_by_quadrature(kernel, t));
            worst = std::max({worst, dj / std::max(1.0, kernel.j_integral(t)), dn / std::max(1.0, kernel.nu_t(t))});
        }
        const bool quad_ok = worst <= cfg.tol.quadrature;
        table << kernel.name() << ",closed-forms,max_rel_diff_vs_quadrature," << worst << ',' << (quad_ok ? 1 : 0)
              << '\n';
        out.pass = out.pass && rep.pass() && quad_ok;
        out.summary += std::string(out.summary.empty() ? "" : "; ") + std::string(kernel.name()) + ": (a) " +
                       (rep.pass_a ? "ok" : "FAIL") + " (b) " + (rep.pass_b ? "ok" : "FAIL") + " (c) " +
                       (rep.pass_c ? "ok" : "FAIL") + ", J/nu vs quadrature " + fmt(worst);
    }
    out.tables.emplace_back("h2", table.str());
    return out;
}

CheckOutcome cross_solver(const RunConfig& cfg) {
    const auto p = cfg.problem();
    require_exact_regime(p, "cross-solver");
    const std::size_t n = cfg.ensemble_size(100);
    CheckReport rep;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, i);
        const auto config = sample_prm(p.noise, p.window, seed);
        const auto exact = solve_forward(config, p, false);
        const auto pic = picard_solve(config, p, cfg.iters, false);
        double d = 0.0;
        for (std::size_t k = 0; k < config.size(); ++k)
            d = std::max(d, std::abs(exact.atom_values[k] - pic.path.atom_values[k]));
        worst = std::max(worst, d);
        rep.rows.push_back({"cross-solver", "draw=" + std::to_string(i) + ";seed=" + std::to_string(seed) +
                                                ";atoms=" + std::to_string(config.size()),
                            0.0, 0.0, d, d < cfg.tol.cross});
    }
    EnsembleParams ep;
    ep.n = std::max<std::size_t>(n, 100);
    ep.n_iter = std::max<std::size_t>(cfg.iters, 2);
    ep.seed = derive_seed(cfg.seed, n);
    ep.workers = cfg.workers;
    ep.z_slack = cfg.tol.z_max;
    const auto ex = existence_diagnostics(p, ep);

    CheckOutcome out;
    out.pass = rep.pass() && ex.pass();
    out.summary = "max |picard(" + std::to_string(cfg.iters) + ") - forward| = " + fmt(worst) + "; H_n recursion " +
                  (ex.recursion_ok ? "ok" : "FAIL") + ", sup H_n^{1/2} ratio " +
                  fmt(ex.ratios.empty() ? 0.0 : ex.ratios.back()) + (ex.summable_ok ? "" : " (no decay)") +
                  ", K_n " + (ex.bounded_ok ? "bounded" : "not settled");
    out.tables.emplace_back("cross_solver", csv([&](std::ostream& os) { write_check_csv(os, rep); }));
    out.tables.emplace_back("existence", csv([&](std::ostream& os) { write_existence_csv(os, ex); }));
    return out;
}

}  // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = {
        "isometry", "chain-rule", "exp-derivative", "duality",    "derivative-eq",
        "picard-derivative", "gronwall", "h2", "cross-solver", "nonlinear-probe",
    };
    return names;
}

CheckOutcome run_check(const std::string& name, const RunConfig& config) {
    config.validate();
    if (name == "isometry") return isometry(config);
    if (name == "chain-rule") return exact_identity(config, false);
    if (name == "exp-derivative") return exact_identity(config, true);
    if (name == "duality") return duality(config);
    if (name == "derivative-eq") return derivative_eq(config);
    if (name == "picard-derivative") return picard_derivative(config);
    if (name == "gronwall") return gronwall(config);
    if (name == "h2") return h2(config);
    if (name == "cross-solver") return cross_solver(config);
    if (name == "nonlinear-probe") return nonlinear(config);
    throw ConfigError("unknown check `" + name + "`");
}

}  // namespace levyspde
