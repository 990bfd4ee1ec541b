#include "levyspde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "levyspde/errors.hpp"

namespace levyspde {

// ---------------------------------------------------------------------------
// Functionals and the difference operator

PathFunctional PathFunctional::constant(double c) {
    return PathFunctional("const", [c](const PointConfiguration&) { return c; });
}

PathFunctional PathFunctional::linear(const Integrand& h, const LevyMeasureSpec& noise) {
    return PathFunctional("L(" + h.name() + ")",
                          [h, noise](const PointConfiguration& c) { return ito_integral(c, h, noise); });
}

PathFunctional PathFunctional::exponential(const Integrand& h, const LevyMeasureSpec& noise) {
    return PathFunctional("exp(L(" + h.name() + "))", [h, noise](const PointConfiguration& c) {
        return std::exp(ito_integral(c, h, noise));
    });
}

PathFunctional PathFunctional::solution_at(const ProblemSpec& problem, double t, double x) {
    if (problem.noise.m1() != 0.0)
        throw ConfigError("solution_at: requires m1 = 0 (exact forward solver)");
    return PathFunctional("u(" + std::to_string(t) + "," + std::to_string(x) + ")",
                          [problem, t, x](const PointConfiguration& c) {
                              const auto path = solve_forward(c, problem, false);
                              return mild_value(c, problem, path.atom_values, t, x);
                          });
}

PathFunctional PathFunctional::compose(std::string g_name, std::function<double(double)> g,
                                       const PathFunctional& F) {
    return PathFunctional(g_name + "(" + F.name() + ")",
                          [g = std::move(g), F](const PointConfiguration& c) { return g(F(c)); });
}

PathFunctional PathFunctional::combination(double alpha, const PathFunctional& F, double beta,
                                           const PathFunctional& G) {
    return PathFunctional("comb(" + F.name() + "," + G.name() + ")",
                          [=](const PointConfiguration& c) { return alpha * F(c) + beta * G(c); });
}

double difference_derivative(const PathFunctional& F, const PointConfiguration& config,
                             const DerivativePoint& point) {
    const auto plus = add_atom(config, Atom{point.r, point.xi, point.z});
    return F(plus) - F(config);
}

bool CheckReport::pass() const noexcept {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

double CheckReport::worst_residual() const noexcept {
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, std::isnan(r.residual) ? std::numeric_limits<double>::infinity()
                                                                     : std::abs(r.residual));
    return w;
}

void write_check_csv(std::ostream& out, const CheckReport& report) {
    const auto old = out.precision(17);
    out << "check,params,lhs,rhs,residual_or_z,pass\n";
    for (const auto& r : report.rows)
        out << r.check << ',' << r.params << ',' << r.lhs << ',' << r.rhs << ',' << r.residual << ','
            << (r.pass ? 1 : 0) << '\n';
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Section-2 identities

ChainRuleResidual chain_rule_residual(const std::function<double(double)>& g, const PathFunctional& F,
                                      double DF, const PointConfiguration& config,
                                      const DerivativePoint& point) {
    const auto gF = PathFunctional::compose("g", g, F);
    const double lhs = difference_derivative(gF, config, point);
    const double f = F(config);
    const double g0 = g(f), g1 = g(f + DF);
    return {lhs, g1 - g0, std::abs(lhs - (g1 - g0)), 1.0 + std::abs(g0) + std::abs(g1)};
}

double exp_derivative_residual(const Integrand& h, const LevyMeasureSpec& noise,
                               const PointConfiguration& config, const DerivativePoint& point) {
    const double lhs = difference_derivative(PathFunctional::exponential(h, noise), config, point);
    const double L = ito_integral(config, h, noise);
    const double hz = h(point.r, point.xi) * point.z;
    const double rhs = std::exp(L) * std::expm1(hz);
    return std::abs(lhs - rhs) / (std::exp(L) + std::exp(L + hz));
}

DerivativePoint random_point(const LevyMeasureSpec& noise, const SpaceTimeWindow& window, Rng& rng) {
    if (noise.is_zero()) throw ConfigError("random_point: jump law has zero mass");
    std::uniform_real_distribution<double> ut(0.0, window.T()), ux(-window.R(), window.R());
    double r = 0.0;
    while (r <= 0.0) r = ut(rng);
    const double xi = ux(rng);
    return {r, xi, noise.sample_jump(rng)};
}

namespace {

std::string draw_params(std::size_t i, std::uint64_t seed, const DerivativePoint& p) {
    return "draw=" + std::to_string(i) + ";seed=" + std::to_string(seed) + ";r=" + std::to_string(p.r) +
           ";xi=" + std::to_string(p.xi) + ";z=" + std::to_string(p.z);
}

struct Draw {
    PointConfiguration config;
    DerivativePoint point;
    std::uint64_t seed;
    Rng rng;
};

Draw make_draw(const LevyMeasureSpec& noise, const SpaceTimeWindow& window, std::uint64_t master,
               std::size_t i) {
    const std::uint64_t seed = derive_seed(master, i);
    Rng rng(seed);
    auto config = sample_prm(noise, window, rng());
    for (;;) {
        const auto p = random_point(noise, window, rng);
        if (!config.has_time(p.r)) return {std::move(config), p, seed, rng};
    }
}

}  // namespace

CheckReport exp_derivative_check(const Integrand& h, const LevyMeasureSpec& noise,
                                 const SpaceTimeWindow& window, std::size_t draws, std::uint64_t seed,
                                 double tol) {
    CheckReport rep;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto d = make_draw(noise, window, seed, i);
        const double L = ito_integral(d.config, h, noise);
        const double lhs = difference_derivative(PathFunctional::exponential(h, noise), d.config, d.point);
        const double rhs = std::exp(L) * std::expm1(h(d.point.r, d.point.xi) * d.point.z);
        const double res = exp_derivative_residual(h, noise, d.config, d.point);
        rep.rows.push_back({"exp-derivative", draw_params(i, d.seed, d.point), lhs, rhs, res, res <= tol});
    }
    return rep;
}

CheckReport chain_rule_check(const Integrand& h, const LevyMeasureSpec& noise,
                             const SpaceTimeWindow& window, std::size_t draws, std::uint64_t seed,
                             double tol) {
    const std::vector<std::pair<std::string, std::function<double(double)>>> maps = {
        {"identity", [](double x) { return x; }},
        {"square", [](double x) { return x * x; }},
        {"exp", [](double x) { return std::exp(x); }},
        {"sin", [](double x) { return std::sin(x); }},
    };
    const auto F = PathFunctional::linear(h, noise);
    CheckReport rep;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto d = make_draw(noise, window, seed, i);
        const double DF = h(d.point.r, d.point.xi) * d.point.z;
        for (const auto& [name, g] : maps) {
            const auto c = chain_rule_residual(g, F, DF, d.config, d.point);
            rep.rows.push_back({"chain-rule:" + name, draw_params(i, d.seed, d.point), c.lhs, c.rhs,
                                c.residual / c.scale, c.residual <= tol * c.scale});
        }
    }
    return rep;
}

EstimatorSummary duality_test(const Integrand& h, const Integrand& g, const LevyMeasureSpec& noise,
                              const SpaceTimeWindow& window, std::size_t n, std::uint64_t seed,
                              unsigned workers) {
    if (n < 100) throw ConfigError("duality_test: need N >= 100");
    const double target = noise.v() * inner_product(h, g);
    auto rows = run_ensemble(
        EnsembleOptions{n, seed, workers}, {"duality:" + h.name() + "," + g.name()},
        [&](std::size_t, std::uint64_t s) {
            const auto config = sample_prm(noise, window, s);
            return std::vector<double>{ito_integral(config, h, noise) * ito_integral(config, g, noise)};
        },
        {target});
    return rows.front();
}

// ---------------------------------------------------------------------------
// Derivative of the solution

namespace {

struct PairedSolve {
    PointConfiguration plus;
    SolutionPath base;
    SolutionPath shifted;
    std::size_t inserted;  ///< index of the point in `plus`
};

PairedSolve paired_solve(const ProblemSpec& problem, const PointConfiguration& config,
                         const DerivativePoint& point) {
    auto plus = add_atom(config, Atom{point.r, point.xi, point.z});
    auto base = solve_forward(config, problem, false);
    auto shifted = solve_forward(plus, problem, false);
    return {std::move(plus), std::move(base), std::move(shifted), config.count_before(point.r)};
}

// Du at atom i of the base configuration.
double du_at(const PairedSolve& s, std::size_t i) {
    const std::size_t j = i < s.inserted ? i : i + 1;
    return s.shifted.atom_values[j] - s.base.atom_values[i];
}

void require_exact_regime(const ProblemSpec& problem, const char* who) {
    if (problem.noise.m1() != 0.0) throw ConfigError(std::string(who) + ": requires m1 = 0");
}

}  // namespace

DerivativeEquationResidual derivative_equation_residual(const ProblemSpec& problem,
                                                        const PointConfiguration& config,
                                                        const DerivativePoint& point, double t, double x) {
    require_exact_regime(problem, "derivative_equation_residual");
    if (!problem.sigma.is_affine())
        throw ConfigError("derivative_equation_residual: sigma `" + problem.sigma.name() +
                          "` is not affine; use nonlinear_probe");
    const double a = problem.sigma.affine_tag()->a;
    const auto s = paired_solve(problem, config, point);
    const double lhs = mild_value(s.plus, problem, s.shifted.atom_values, t, x) -
                       mild_value(config, problem, s.base.atom_values, t, x);
    if (point.r >= t) return {lhs, 0.0, std::abs(lhs), true};

    const double u_r = mild_value(config, problem, s.base.atom_values, point.r, point.xi);
    double rhs = problem.kernel.evaluate(t - point.r, x - point.xi) * problem.sigma(u_r) * point.z;
    for (std::size_t i = s.inserted; i < config.size(); ++i) {
        const Atom& at = config[i];
        if (at.t >= t) break;
        rhs += problem.kernel.evaluate(t - at.t, x - at.x) * a * du_at(s, i) * at.z;
    }
    return {lhs, rhs, std::abs(lhs - rhs), false};
}

CheckReport derivative_equation_check(const ProblemSpec& problem, std::size_t draws, std::uint64_t seed,
                                      double rel_tol) {
    CheckReport rep;
    const auto& w = problem.window;
    for (std::size_t i = 0; i < draws; ++i) {
        auto d = make_draw(problem.noise, w, seed, i);
        std::uniform_real_distribution<double> ut(d.point.r, w.T()), ux(-w.R(), w.R());
        const double t = ut(d.rng), x = ux(d.rng);
        const auto r = derivative_equation_residual(problem, d.config, d.point, t, x);
        rep.rows.push_back({"derivative-eq", draw_params(i, d.seed, d.point) + ";t=" + std::to_string(t) +
                                                 ";x=" + std::to_string(x),
                            r.lhs, r.rhs, r.residual, r.residual <= rel_tol * (1.0 + std::abs(r.lhs))});
    }
    return rep;
}

CheckReport adaptedness_check(const ProblemSpec& problem, std::size_t draws, std::uint64_t seed) {
    CheckReport rep;
    const auto& w = problem.window;
    for (std::size_t i = 0; i < draws; ++i) {
        auto d = make_draw(problem.noise, w, seed, i);
        std::uniform_real_distribution<double> ut(0.0, d.point.r), ux(-w.R(), w.R());
        // Every tenth draw probes the boundary case t = r.
        const double t = i % 10 == 0 ? d.point.r : std::max(ut(d.rng), 1e-12);
        const double x = ux(d.rng);
        const double D = difference_derivative(PathFunctional::solution_at(problem, t, x), d.config, d.point);
        rep.rows.push_back({"adaptedness", draw_params(i, d.seed, d.point) + ";t=" + std::to_string(t),
                            D, 0.0, std::abs(D), D == 0.0});
    }
    return rep;
}

PicardDerivativeReport picard_derivative_recursion(const ProblemSpec& problem,
                                                   const PointConfiguration& config,
                                                   const DerivativePoint& point, std::size_t n_iter,
                                                   double rho) {
    require_exact_regime(problem, "picard_derivative_recursion");
    if (n_iter < 2) throw ConfigError("picard_derivative_recursion: need n_iter >= 2");
    const auto plus = add_atom(config, Atom{point.r, point.xi, point.z});
    const std::size_t p = config.count_before(point.r);
    const auto base = picard_trace(config, problem, n_iter, false);
    const auto shifted = picard_trace(plus, problem, n_iter, false);
    const std::size_t K = config.size();
    const auto& sigma = problem.sigma;
    const auto& G = problem.kernel;

    auto Du = [&](std::size_t n, std::size_t i) {
        return shifted.atoms[n][i < p ? i : i + 1] - base.atoms[n][i];
    };
    // u_n(r, ξ) from the base iterates.
    auto u_at_point = [&](std::size_t n) {
        if (n == 0) return deterministic_part(problem, point.r, point.xi);
        double u = deterministic_part(problem, point.r, point.xi);
        for (std::size_t i = 0; i < p; ++i)
            u += G.evaluate(point.r - config[i].t, point.xi - config[i].x) * sigma(base.atoms[n - 1][i]) *
                 config[i].z;
        return u;
    };

    PicardDerivativeReport rep;
    rep.recursion_ok = true;
    for (std::size_t n = 0; n < n_iter; ++n) {
        const double s_r = sigma(u_at_point(n));
        double worst = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < K; ++k) {
            const Atom& at = config[k];
            double rhs = 0.0;
            if (at.t > point.r) {
                rhs = G.evaluate(at.t - point.r, at.x - point.xi) * s_r * point.z;
                for (std::size_t i = p; i < k; ++i) {
                    const double un = base.atoms[n][i];
                    rhs += G.evaluate(at.t - config[i].t, at.x - config[i].x) *
                           (sigma(un + Du(n, i)) - sigma(un)) * config[i].z;
                }
            }
            const double lhs = Du(n + 1, k);
            const double res = std::abs(lhs - rhs);
            worst = std::max(worst, res);
            ok = ok && res <= 1e-10 * (1.0 + std::abs(lhs));
            if (n == 0) {
                rep.first_iterate_residual = std::max(rep.first_iterate_residual, res);
            }
        }
        rep.recursion_residuals.push_back(worst);
        rep.recursion_ok = rep.recursion_ok && ok;
    }
    double first_scale = 1.0;
    for (std::size_t k = 0; k < K; ++k) first_scale = std::max(first_scale, 1.0 + std::abs(Du(1, k)));
    rep.first_ok = rep.first_iterate_residual <= 1e-12 * first_scale;

    for (std::size_t n = 0; n < n_iter; ++n) {
        double d = 0.0;
        for (std::size_t k = 0; k < K; ++k) d = std::max(d, std::abs(Du(n + 1, k) - Du(n, k)));
        rep.cauchy.push_back(d);
    }
    // Geometric decay of the envelope e_n = max_{m>=n} d_m. Single steps are
    // not monotone (contributions of chains of atoms cancel in part, with a
    // parity pattern), so the test is on the mean rate (e_last/e_first)^{1/steps},
    // over the whole range and over its second half. Rounding-level values
    // count as converged.
    const double floor = 1e-13 * first_scale;
    std::vector<double> env(rep.cauchy.size());
    double running = 0.0;
    for (std::size_t n = rep.cauchy.size(); n-- > 0;) env[n] = running = std::max(running, rep.cauchy[n]);
    auto rate_ok = [&](std::size_t from) {
        const std::size_t last = env.size() - 1;
        if (env[last] <= floor || env[from] <= floor) return true;
        return std::pow(env[last] / env[from], 1.0 / static_cast<double>(last - from)) <= rho;
    };
    rep.decay_ok = rate_ok(0) && rate_ok(env.size() / 2);
    return rep;
}

// ---------------------------------------------------------------------------
// Recursive bound on E‖Du_n‖²

DerivativeBoundReport derivative_bound_estimate(const ProblemSpec& problem, const DerivativeBoundParams& params) {
    require_exact_regime(problem, "derivative_bound_estimate");
    if (params.n < 100) throw ConfigError("derivative_bound_estimate: need ensemble size >= 100");
    if (!problem.noise.is_atomic()) throw ConfigError("derivative_bound_estimate: needs an atomic jump law");
    if (params.cells_r < 1 || params.cells_xi < 1 || params.n_iter < 1)
        throw ConfigError("derivative_bound_estimate: empty stratification");
    const auto& w = problem.window;
    const std::size_t N = params.n_iter;

    auto targets = params.targets;
    if (targets.empty())
        for (int a = 1; a <= 4; ++a)
            for (int b = -2; b <= 2; ++b) targets.emplace_back(0.25 * a * w.T(), 0.4 * b * w.R());
    const std::size_t M = targets.size();

    struct Acc {
        std::vector<std::vector<RunningStats>> A;   // [n][target]
        std::vector<std::vector<RunningStats>> sq;  // E|u_n|²
    };
    Acc init{std::vector<std::vector<RunningStats>>(N + 1, std::vector<RunningStats>(M)),
             std::vector<std::vector<RunningStats>>(N + 1, std::vector<RunningStats>(M))};

    const double cell_r = w.T() / static_cast<double>(params.cells_r);
    const double cell_xi = 2.0 * w.R() / static_cast<double>(params.cells_xi);
    const auto atoms_z = problem.noise.atoms();
    const auto weights_z = problem.noise.weights();

    // u_n at (t, x) from the atom iterates.
    auto value = [&](const PointConfiguration& c, const PicardTrace& tr, std::size_t n, double t, double x) {
        double u = deterministic_part(problem, t, x);
        if (n == 0) return u;
        const auto& prev = tr.atoms[n - 1];
        for (std::size_t i = 0; i < c.size() && c[i].t < t; ++i)
            u += problem.kernel.evaluate(t - c[i].t, x - c[i].x) * problem.sigma(prev[i]) * c[i].z;
        return u;
    };

    Acc acc = reduce_ensemble(
        EnsembleOptions{params.n, params.seed, params.workers}, init,
        [&](Acc& a, std::size_t, std::uint64_t seed) {
            Rng rng(seed);
            const auto config = sample_prm(problem.noise, w, rng());
            const auto base = picard_trace(config, problem, N, false);
            std::vector<std::vector<double>> base_vals(N + 1, std::vector<double>(M));
            for (std::size_t n = 0; n <= N; ++n)
                for (std::size_t m = 0; m < M; ++m) {
                    base_vals[n][m] = value(config, base, n, targets[m].first, targets[m].second);
                    a.sq[n][m].push(base_vals[n][m] * base_vals[n][m]);
                }
            std::vector<std::vector<double>> norm(N + 1, std::vector<double>(M, 0.0));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t cr = 0; cr < params.cells_r; ++cr)
                for (std::size_t cx = 0; cx < params.cells_xi; ++cx) {
                    double r = 0.0;
                    while (r <= 0.0) r = (static_cast<double>(cr) + unit(rng)) * cell_r;
                    const double xi = -w.R() + (static_cast<double>(cx) + unit(rng)) * cell_xi;
                    if (config.has_time(r)) continue;
                    for (std::size_t q = 0; q < atoms_z.size(); ++q) {
                        const auto plus = add_atom(config, Atom{r, xi, atoms_z[q]});
                        const auto tr = picard_trace(plus, problem, N, false);
                        const double wgt = weights_z[q] * cell_r * cell_xi;
                        for (std::size_t m = 0; m < M; ++m) {
                            if (r >= targets[m].first) continue;
                            for (std::size_t n = 1; n <= N; ++n) {
                                const double D =
                                    value(plus, tr, n, targets[m].first, targets[m].second) - base_vals[n][m];
                                norm[n][m] += wgt * D * D;
                            }
                        }
                    }
                }
            for (std::size_t n = 0; n <= N; ++n)
                for (std::size_t m = 0; m < M; ++m) a.A[n][m].push(norm[n][m]);
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t n = 0; n < into.A.size(); ++n)
                for (std::size_t m = 0; m < into.A[n].size(); ++m) {
                    into.A[n][m].merge(from.A[n][m]);
                    into.sq[n][m].merge(from.sq[n][m]);
                }
        });

    DerivativeBoundReport rep;
    rep.targets = targets;
    rep.A.assign(N + 1, std::vector<double>(M));
    rep.A_se = rep.A;
    rep.A_sup.assign(N + 1, 0.0);
    rep.K.assign(N + 1, 0.0);
    std::vector<double> A_sup_se(N + 1, 0.0), K_se(N + 1, 0.0);
    for (std::size_t n = 0; n <= N; ++n)
        for (std::size_t m = 0; m < M; ++m) {
            rep.A[n][m] = acc.A[n][m].mean();
            rep.A_se[n][m] = acc.A[n][m].stderr_of_mean();
            if (rep.A[n][m] >= rep.A_sup[n]) {
                rep.A_sup[n] = rep.A[n][m];
                A_sup_se[n] = rep.A_se[n][m];
            }
            if (acc.sq[n][m].mean() >= rep.K[n]) {
                rep.K[n] = acc.sq[n][m].mean();
                K_se[n] = acc.sq[n][m].stderr_of_mean();
            }
        }

    const double v = problem.noise.v();
    const double C2 = problem.sigma.lipschitz() * problem.sigma.lipschitz();
    const double D2 = problem.sigma.growth() * problem.sigma.growth();
    const double z = params.z_slack;
    rep.recursion_ok = true;
    rep.bound.assign(N + 1, std::vector<double>(M, 0.0));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m < M; ++m) {
            const double nu = problem.kernel.nu_t(targets[m].first);
            const double b = 4.0 * v * D2 * (1.0 + rep.K[n]) * nu + 2.0 * v * C2 * rep.A_sup[n] * nu;
            const double slack = z * (rep.A_se[n + 1][m] + 4.0 * v * D2 * K_se[n] * nu +
                                      2.0 * v * C2 * A_sup_se[n] * nu) +
                                 1e-12 * (1.0 + b);
            rep.bound[n + 1][m] = b;
            rep.recursion_ok = rep.recursion_ok && rep.A[n + 1][m] <= b + slack;
        }
    rep.bounded_ok = std::all_of(rep.A_sup.begin(), rep.A_sup.end(), [](double a) { return std::isfinite(a); }) &&
                     rep.A_sup[N] <= rep.A_sup[N - 1] * (1.0 + 1e-2) + z * (A_sup_se[N] + A_sup_se[N - 1]) + 1e-300;
    return rep;
}

NonlinearProbeResult nonlinear_probe(const ProblemSpec& problem, const PointConfiguration& config,
                                     const DerivativePoint& point, double t, double x) {
    require_exact_regime(problem, "nonlinear_probe");
    const auto s = paired_solve(problem, config, point);
    const auto& sigma = problem.sigma;
    const double lhs = mild_value(s.plus, problem, s.shifted.atom_values, t, x) -
                       mild_value(config, problem, s.base.atom_values, t, x);
    if (point.r >= t) return {lhs, 0.0, 0.0, std::abs(lhs), std::abs(lhs)};
    const double u_r = mild_value(config, problem, s.base.atom_values, point.r, point.xi);
    const double head = problem.kernel.evaluate(t - point.r, x - point.xi) * sigma(u_r) * point.z;
    double diff = head, lin = head;
    for (std::size_t i = s.inserted; i < config.size(); ++i) {
        const Atom& at = config[i];
        if (at.t >= t) break;
        const double g = problem.kernel.evaluate(t - at.t, x - at.x) * at.z;
        const double u = s.base.atom_values[i];
        const double du = du_at(s, i);
        const double step = 1e-6 * (1.0 + std::abs(u));
        const double slope = (sigma(u + step) - sigma(u - step)) / (2.0 * step);
        diff += g * (sigma(u + du) - sigma(u));
        lin += g * slope * du;
    }
    return {lhs, diff, lin, std::abs(lhs - diff), std::abs(lhs - lin)};
}

}  // namespace levyspde
