#include "levyspde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "levyspde/errors.hpp"

namespace levyspde {

// ---------------------------------------------------------------------------
// σ and initial data

SigmaMap::SigmaMap(std::string name, Fn fn, double lipschitz, std::optional<Affine> affine)
    : name_(std::move(name)), fn_(std::move(fn)), lipschitz_(lipschitz), affine_(affine) {
    if (!std::isfinite(lipschitz_) || lipschitz_ < 0.0)
        throw ConfigError("sigma: Lipschitz constant must be finite and >= 0");
    growth_ = std::max(lipschitz_, std::abs(fn_(0.0)));
}

SigmaMap SigmaMap::affine(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("sigma: affine coefficients must be finite");
    return SigmaMap("affine(" + std::to_string(a) + "," + std::to_string(b) + ")",
                    [a, b](double u) { return a * u + b; }, std::abs(a), Affine{a, b});
}

SigmaMap SigmaMap::abs_value() {
    return SigmaMap("abs", [](double u) { return std::abs(u); }, 1.0);
}

SigmaMap SigmaMap::sine() {
    return SigmaMap("sin", [](double u) { return std::sin(u); }, 1.0);
}

SigmaMap SigmaMap::parse(const std::string& name, double a, double b) {
    if (name == "affine") return affine(a, b);
    if (name == "zero") return zero();
    if (name == "const" || name == "constant") return constant(b);
    if (name == "abs") return abs_value();
    if (name == "sin") return sine();
    throw ConfigError("unknown sigma `" + name + "` (expected affine|zero|const|abs|sin)");
}

bool SigmaMap::spot_check(Rng& rng, std::size_t pairs) const {
    std::normal_distribution<double> dist(0.0, 10.0);
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x = dist(rng), y = dist(rng);
        const double sx = fn_(x), sy = fn_(y);
        const double tol = 1e-12 * (1.0 + std::abs(sx) + std::abs(sy));
        if (std::abs(sx - sy) > lipschitz_ * std::abs(x - y) + tol) return false;
        if (std::abs(sx) > growth_ * (1.0 + std::abs(x)) + tol) return false;
        if (affine_ && std::abs(sx - (affine_->a * x + affine_->b)) > tol) return false;
    }
    return true;
}

InitialData InitialData::parse(const std::string& name, double c) {
    if (name == "constant") return {InitialCondition::Constant, c};
    if (name == "cosine") return {InitialCondition::Cosine, 1.0};
    if (name == "wave-pair") return {InitialCondition::WavePair, 1.0};
    throw ConfigError("unknown initial condition `" + name + "` (expected constant|cosine|wave-pair)");
}

double deterministic_part(const ProblemSpec& problem, double t, double x) {
    const bool wave = problem.kernel.kind() == KernelKind::Wave;
    switch (problem.initial.kind) {
    case InitialCondition::Constant:
        return problem.initial.c;
    case InitialCondition::Cosine:
        if (wave) throw ConfigError("initial condition `cosine` is defined for the heat kernel; use wave-pair");
        return std::exp(-0.5 * t) * std::cos(x);
    case InitialCondition::WavePair:
        if (!wave) throw ConfigError("initial condition `wave-pair` requires the wave kernel");
        return std::cos(x) * std::cos(t);
    }
    return 0.0;
}

double initial_bound(const ProblemSpec& problem) {
    return problem.initial.kind == InitialCondition::Constant ? std::abs(problem.initial.c) : 1.0;
}

bool check_h1(const ProblemSpec& problem) {
    const double bound = initial_bound(problem);
    GridField g(problem.window, problem.n_t, problem.n_x);
    for (std::size_t k = 0; k < g.n_t(); ++k)
        for (std::size_t j = 0; j < g.n_x(); ++j) {
            const double w = deterministic_part(problem, g.time(k), g.space(j));
            if (!std::isfinite(w) || std::abs(w) > bound * (1.0 + 1e-14)) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// Pathwise solvers

namespace {

std::vector<double> apply_sigma(const SigmaMap& sigma, std::span<const double> u) {
    std::vector<double> s(u.size());
    std::transform(u.begin(), u.end(), s.begin(), [&](double v) { return sigma(v); });
    return s;
}

GridField apply_sigma(const SigmaMap& sigma, const GridField& u) {
    GridField s = u;
    for (double& v : s.values()) v = sigma(v);
    return s;
}

GridField grid_with(const ProblemSpec& problem, const PointConfiguration& config,
                    std::span<const double> sigma_atoms, const GridField* sigma_grid) {
    GridField g(problem.window, problem.n_t, problem.n_x);
    const double m1 = problem.noise.m1();
    for (std::size_t k = 0; k < g.n_t(); ++k) {
        const double t = g.time(k);
        for (std::size_t j = 0; j < g.n_x(); ++j) {
            const double x = g.space(j);
            g.at(k, j) = deterministic_part(problem, t, x) +
                         stochastic_convolution(config, problem.kernel, sigma_atoms, sigma_grid, t, x, m1);
        }
    }
    return g;
}

GridField initial_grid(const ProblemSpec& problem) {
    GridField g(problem.window, problem.n_t, problem.n_x);
    for (std::size_t k = 0; k < g.n_t(); ++k)
        for (std::size_t j = 0; j < g.n_x(); ++j) g.at(k, j) = deterministic_part(problem, g.time(k), g.space(j));
    return g;
}

std::vector<double> initial_atoms(const ProblemSpec& problem, const PointConfiguration& config) {
    std::vector<double> u;
    u.reserve(config.size());
    for (const Atom& a : config.atoms()) u.push_back(deterministic_part(problem, a.t, a.x));
    return u;
}

// One Picard step at atoms: u_{n+1}(atom k) from σ(u_n).
std::vector<double> step_atoms(const ProblemSpec& problem, const PointConfiguration& config,
                               std::span<const double> sigma_atoms, const GridField* sigma_grid) {
    const double m1 = problem.noise.m1();
    std::vector<double> next(config.size());
    for (std::size_t k = 0; k < config.size(); ++k) {
        const Atom& a = config[k];
        next[k] = deterministic_part(problem, a.t, a.x) +
                  stochastic_convolution(config, problem.kernel, sigma_atoms, sigma_grid, a.t, a.x, m1);
    }
    return next;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// ∫₀^{t_k} f(s) J(t_k − s) ds for f piecewise linear on the lattice times.
double convolve_with_j(const KernelModel& kernel, std::span<const double> times,
                       std::span<const double> f, std::size_t k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < k; ++m)
        acc += kernel.j_convolution_segment(times[k], times[m], times[m + 1], f[m], f[m + 1]);
    return acc;
}

}  // namespace

double mild_value(const PointConfiguration& config, const ProblemSpec& problem,
                  std::span<const double> atom_values, double t, double x) {
    const std::size_t n_before = config.count_before(t);
    if (atom_values.size() < n_before) throw ConfigError("mild_value: missing atom values");
    const auto sigma = apply_sigma(problem.sigma, atom_values.first(n_before));
    return deterministic_part(problem, t, x) +
           stochastic_convolution(config, problem.kernel, sigma, nullptr, t, x, 0.0);
}

SolutionPath solve_forward(const PointConfiguration& config, const ProblemSpec& problem, bool fill_grid) {
    if (problem.noise.m1() != 0.0)
        throw ConfigError("solve_forward: jump law has m1 != 0, so the compensator does not vanish; use picard_solve");
    SolutionPath path;
    path.solver = "forward";
    path.seed = config.seed();
    const std::size_t K = config.size();
    path.atom_values.resize(K);
    std::vector<double> sigma(K);
    const auto atoms = config.atoms();
    for (std::size_t k = 0; k < K; ++k) {
        const Atom& a = atoms[k];
        double u = deterministic_part(problem, a.t, a.x);
        for (std::size_t i = 0; i < k; ++i) {
            if (sigma[i] == 0.0) continue;
            u += problem.kernel.evaluate(a.t - atoms[i].t, a.x - atoms[i].x) * sigma[i] * atoms[i].z;
        }
        path.atom_values[k] = u;
        sigma[k] = problem.sigma(u);
    }
    if (fill_grid) {
        path.grid = grid_with(problem, config, sigma, nullptr);
        path.has_grid = true;
    }
    return path;
}

double mild_residual(const PointConfiguration& config, const ProblemSpec& problem, const SolutionPath& path) {
    double worst = 0.0;
    for (std::size_t k = 0; k < config.size(); ++k) {
        const double rhs = mild_value(config, problem, path.atom_values, config[k].t, config[k].x);
        worst = std::max(worst, std::abs(path.atom_values[k] - rhs));
    }
    return worst;
}

PicardResult picard_solve(const PointConfiguration& config, const ProblemSpec& problem,
                          std::size_t n_iter, bool fill_grid) {
    const bool compensated = problem.noise.m1() != 0.0;
    PicardResult result;
    std::vector<double> u = initial_atoms(problem, config);
    std::vector<double> prev = u;
    GridField grid;
    if (compensated || fill_grid) grid = initial_grid(problem);
    for (std::size_t n = 1; n <= n_iter; ++n) {
        const auto sigma = apply_sigma(problem.sigma, u);
        std::vector<double> next;
        if (compensated) {
            const GridField sigma_grid = apply_sigma(problem.sigma, grid);
            next = step_atoms(problem, config, sigma, &sigma_grid);
            grid = grid_with(problem, config, sigma, &sigma_grid);
        } else {
            next = step_atoms(problem, config, sigma, nullptr);
        }
        result.sup_differences.push_back(max_abs_diff(next, u));
        prev = std::move(u);
        u = std::move(next);
    }
    if (fill_grid && !compensated && n_iter > 0) grid = grid_with(problem, config, apply_sigma(problem.sigma, prev), nullptr);
    result.path.atom_values = std::move(u);
    result.path.solver = "picard(" + std::to_string(n_iter) + ")";
    result.path.seed = config.seed();
    if (fill_grid) {
        result.path.grid = std::move(grid);
        result.path.has_grid = true;
    }
    return result;
}

PicardTrace picard_trace(const PointConfiguration& config, const ProblemSpec& problem,
                         std::size_t n_iter, bool with_grids) {
    const bool compensated = problem.noise.m1() != 0.0;
    const bool grids = with_grids || compensated;
    PicardTrace trace;
    trace.atoms.push_back(initial_atoms(problem, config));
    if (grids) trace.grids.push_back(initial_grid(problem));
    for (std::size_t n = 1; n <= n_iter; ++n) {
        const auto sigma = apply_sigma(problem.sigma, trace.atoms.back());
        if (compensated) {
            const GridField sigma_grid = apply_sigma(problem.sigma, trace.grids.back());
            trace.atoms.push_back(step_atoms(problem, config, sigma, &sigma_grid));
            trace.grids.push_back(grid_with(problem, config, sigma, &sigma_grid));
        } else {
            trace.atoms.push_back(step_atoms(problem, config, sigma, nullptr));
            if (grids) trace.grids.push_back(grid_with(problem, config, sigma, nullptr));
        }
    }
    if (!with_grids) trace.grids.clear();
    return trace;
}

// ---------------------------------------------------------------------------
// Existence diagnostics

ExistenceReport existence_diagnostics(const ProblemSpec& problem, const EnsembleParams& params) {
    if (params.n < 100) throw ConfigError("existence_diagnostics: need ensemble size >= 100");
    if (params.n_iter < 2) throw ConfigError("existence_diagnostics: need n_iter >= 2");
    const std::size_t N = params.n_iter;
    const std::size_t cells = problem.n_t * problem.n_x;

    struct Acc {
        std::vector<std::vector<RunningStats>> diff2;  // n = 1..N
        std::vector<std::vector<RunningStats>> sq;     // n = 0..N
    };
    Acc init;
    init.diff2.assign(N + 1, std::vector<RunningStats>(cells));
    init.sq.assign(N + 1, std::vector<RunningStats>(cells));

    Acc acc = reduce_ensemble(
        EnsembleOptions{params.n, params.seed, params.workers}, init,
        [&](Acc& a, std::size_t, std::uint64_t seed) {
            const auto config = sample_prm(problem.noise, problem.window, seed);
            const auto trace = picard_trace(config, problem, N, true);
            for (std::size_t n = 0; n <= N; ++n) {
                const auto cur = trace.grids[n].values();
                for (std::size_t c = 0; c < cells; ++c) {
                    a.sq[n][c].push(cur[c] * cur[c]);
                    if (n > 0) {
                        const double d = cur[c] - trace.grids[n - 1].values()[c];
                        a.diff2[n][c].push(d * d);
                    }
                }
            }
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t n = 0; n < into.sq.size(); ++n)
                for (std::size_t c = 0; c < into.sq[n].size(); ++c) {
                    into.sq[n][c].merge(from.sq[n][c]);
                    into.diff2[n][c].merge(from.diff2[n][c]);
                }
        });

    ExistenceReport rep;
    const GridField lattice(problem.window, problem.n_t, problem.n_x);
    for (std::size_t k = 0; k < problem.n_t; ++k) rep.times.push_back(lattice.time(k));
    rep.vc2 = problem.noise.v() * problem.sigma.lipschitz() * problem.sigma.lipschitz();
    rep.H.assign(N + 1, std::vector<double>(problem.n_t, 0.0));
    rep.H_se = rep.H;
    rep.bound = rep.H;
    rep.slack = rep.H;
    rep.K.assign(N + 1, 0.0);

    for (std::size_t n = 0; n <= N; ++n) {
        for (std::size_t k = 0; k < problem.n_t; ++k) {
            for (std::size_t j = 0; j < problem.n_x; ++j) {
                const std::size_t c = k * problem.n_x + j;
                rep.K[n] = std::max(rep.K[n], acc.sq[n][c].mean());
                if (n > 0 && acc.diff2[n][c].mean() >= rep.H[n][k]) {
                    rep.H[n][k] = acc.diff2[n][c].mean();
                    rep.H_se[n][k] = acc.diff2[n][c].stderr_of_mean();
                }
            }
        }
    }

    // First iterate: E|u₁ − w|² ≤ v ∫₀ᵗ J(t−s) sup_y σ(w(s,y))² ds.
    std::vector<double> sigma_w2(problem.n_t, 0.0);
    for (std::size_t k = 0; k < problem.n_t; ++k)
        for (std::size_t j = 0; j < problem.n_x; ++j) {
            const double s = problem.sigma(deterministic_part(problem, lattice.time(k), lattice.space(j)));
            sigma_w2[k] = std::max(sigma_w2[k], s * s);
        }

    rep.recursion_ok = true;
    for (std::size_t n = 1; n <= N; ++n) {
        for (std::size_t k = 0; k < problem.n_t; ++k) {
            double bound = 0.0, slack = params.z_slack * rep.H_se[n][k];
            if (n == 1) {
                bound = problem.noise.v() * convolve_with_j(problem.kernel, rep.times, sigma_w2, k);
            } else {
                bound = rep.vc2 * convolve_with_j(problem.kernel, rep.times, rep.H[n - 1], k);
                slack += params.z_slack * rep.vc2 * convolve_with_j(problem.kernel, rep.times, rep.H_se[n - 1], k);
            }
            // Relative floor for rounding in the lattice sums.
            slack += 1e-12 * (1.0 + bound);
            rep.bound[n][k] = bound;
            rep.slack[n][k] = slack;
            const bool ok = rep.H[n][k] <= bound + slack;
            rep.recursion_ok = rep.recursion_ok && ok;
            rep.rows.push_back({n, rep.times[k], rep.H[n][k], bound + slack, ok});
        }
    }

    rep.sup_sqrt_H.assign(N + 1, 0.0);
    for (std::size_t n = 1; n <= N; ++n)
        rep.sup_sqrt_H[n] = std::sqrt(*std::max_element(rep.H[n].begin(), rep.H[n].end()));
    for (std::size_t n = 1; n < N; ++n) {
        const double a = rep.sup_sqrt_H[n], b = rep.sup_sqrt_H[n + 1];
        rep.ratios.push_back(a > 0.0 ? b / a : 0.0);
    }
    rep.summable_ok = !rep.ratios.empty() && rep.ratios.back() <= 0.9;

    rep.bounded_ok = std::all_of(rep.K.begin(), rep.K.end(), [](double k) { return std::isfinite(k); }) &&
                     std::abs(rep.K[N] - rep.K[N - 1]) <= 1e-2 * (1.0 + rep.K[N]);
    return rep;
}

// ---------------------------------------------------------------------------
// CSV

void write_atoms_csv(std::ostream& out, const PointConfiguration& config, const SolutionPath& path) {
    const auto old = out.precision(17);
    out << "t,x,z,u\n";
    for (std::size_t i = 0; i < config.size(); ++i)
        out << config[i].t << ',' << config[i].x << ',' << config[i].z << ',' << path.atom_values[i] << '\n';
    out.precision(old);
}

void write_grid_csv(std::ostream& out, const SolutionPath& path) {
    const auto old = out.precision(17);
    out << "t,x,u\n";
    if (path.has_grid) {
        const GridField& g = path.grid;
        for (std::size_t k = 0; k < g.n_t(); ++k)
            for (std::size_t j = 0; j < g.n_x(); ++j) out << g.time(k) << ',' << g.space(j) << ',' << g.at(k, j) << '\n';
    }
    out.precision(old);
}

void write_existence_csv(std::ostream& out, const ExistenceReport& report) {
    const auto old = out.precision(17);
    out << "n,t,H_n,bound,pass\n";
    for (const auto& r : report.rows)
        out << r.n << ',' << r.t << ',' << r.h << ',' << r.bound << ',' << (r.pass ? 1 : 0) << '\n';
    out.precision(old);
}

}  // namespace levyspde
