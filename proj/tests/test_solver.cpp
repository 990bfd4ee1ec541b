#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "levyspde/errors.hpp"
#include "levyspde/solver.hpp"
#include "oracles.hpp"

using namespace levyspde;

namespace {

ProblemSpec make_problem(KernelModel k, SigmaMap s, InitialData init = {},
                         LevyMeasureSpec noise = LevyMeasureSpec::rademacher(5.0), std::size_t n = 64) {
    return ProblemSpec{k, std::move(s), init, SpaceTimeWindow(1.0, 2.0), std::move(noise), n, n};
}

std::function<double(double, double)> g_of(const KernelModel& k) {
    if (k.kind() == KernelKind::Wave) return oracle::wave_g;
    return oracle::heat_g;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("sigma maps declare honest constants") {
    Rng rng(5);
    for (const auto& s : {SigmaMap::affine(0.5, 1.0), SigmaMap::zero(), SigmaMap::constant(-2.0),
                          SigmaMap::abs_value(), SigmaMap::sine()})
        CHECK(s.spot_check(rng));
    const auto a = SigmaMap::affine(-0.7, 2.0);
    CHECK(a.lipschitz() == 0.7);
    CHECK(a.growth() == 2.0);
    CHECK(a.is_affine());
    CHECK_FALSE(SigmaMap::sine().is_affine());
    CHECK_THROWS_AS(SigmaMap::parse("tanh", 0, 0), ConfigError);
    // A lying Lipschitz constant is caught.
    const SigmaMap liar("liar", [](double u) { return 3.0 * u; }, 1.0);
    CHECK_FALSE(liar.spot_check(rng));
}

TEST_CASE("homogeneous solutions solve their PDEs (finite differences)") {
    const auto heat = make_problem(KernelModel::heat(), SigmaMap::zero(), {InitialCondition::Cosine, 1.0});
    const auto wave = make_problem(KernelModel::wave(), SigmaMap::zero(), {InitialCondition::WavePair, 1.0});
    const double d = 1e-3;
    for (double t : {0.2, 0.6}) {
        for (double x : {-1.0, 0.3}) {
            auto w = [&](double tt, double xx) { return deterministic_part(heat, tt, xx); };
            const double wt = (w(t + d, x) - w(t - d, x)) / (2 * d);
            const double wxx = (w(t, x + d) - 2 * w(t, x) + w(t, x - d)) / (d * d);
            CHECK(wt == doctest::Approx(0.5 * wxx).epsilon(1e-5));
            auto v = [&](double tt, double xx) { return deterministic_part(wave, tt, xx); };
            const double vtt = (v(t + d, x) - 2 * v(t, x) + v(t - d, x)) / (d * d);
            const double vxx = (v(t, x + d) - 2 * v(t, x) + v(t, x - d)) / (d * d);
            CHECK(vtt == doctest::Approx(vxx).epsilon(1e-5));
        }
    }
    CHECK(deterministic_part(heat, 0.0, 0.4) == doctest::Approx(std::cos(0.4)));
    CHECK(check_h1(heat));
    CHECK(check_h1(wave));
    const auto bad = make_problem(KernelModel::wave(), SigmaMap::zero(), {InitialCondition::Cosine, 1.0});
    CHECK_THROWS_AS(deterministic_part(bad, 0.1, 0.0), ConfigError);
}

TEST_CASE("forward substitution matches a dense linear solve (affine sigma)") {
    for (const auto k : {KernelModel::wave(), KernelModel::heat()}) {
        const double a = 0.35, b = 0.8;
        const auto p = make_problem(k, SigmaMap::affine(a, b), {InitialCondition::Constant, 1.5});
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto c = sample_prm(p.noise, p.window, seed);
            const auto path = solve_forward(c, p, false);
            const auto ref = oracle::affine_atoms_by_linear_solve(
                c, g_of(k), [](double, double) { return 1.5; }, a, b);
            for (std::size_t i = 0; i < c.size(); ++i)
                CHECK(path.atom_values[i] == doctest::Approx(ref[i]).epsilon(1e-11));
            CHECK(mild_residual(c, p, path) <= 1e-12 * (1.0 + std::abs(path.atom_values.empty() ? 0.0 : path.atom_values.back())));
        }
    }
}

TEST_CASE("sigma zero gives the deterministic part; grid is filled") {
    const auto p = make_problem(KernelModel::heat(), SigmaMap::zero(), {InitialCondition::Cosine, 1.0});
    const auto c = sample_prm(p.noise, p.window, 4);
    const auto path = solve_forward(c, p, true);
    REQUIRE(path.has_grid);
    for (std::size_t k = 0; k < path.grid.n_t(); k += 7)
        for (std::size_t j = 0; j < path.grid.n_x(); j += 5)
            CHECK(path.grid.at(k, j) == deterministic_part(p, path.grid.time(k), path.grid.space(j)));
}

TEST_CASE("Picard iteration is exact after as many steps as atoms (m1 = 0)") {
    const auto p = make_problem(KernelModel::wave(), SigmaMap::sine(), {InitialCondition::WavePair, 1.0});
    const auto c = sample_prm(p.noise, p.window, 8);
    const auto exact = solve_forward(c, p, true);
    const auto pic = picard_solve(c, p, c.size() + 1, true);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(pic.path.atom_values[i] == doctest::Approx(exact.atom_values[i]).epsilon(1e-14));
    CHECK(pic.sup_differences.back() == 0.0);
    for (std::size_t i = 0; i < exact.grid.values().size(); i += 97)
        CHECK(pic.path.grid.values()[i] == doctest::Approx(exact.grid.values()[i]).epsilon(1e-12));

    const auto tr = picard_trace(c, p, 4, true);
    CHECK(tr.atoms.size() == 5);
    CHECK(tr.grids.size() == 5);
    const auto p4 = picard_solve(c, p, 4, false);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(tr.atoms[4][i] == p4.path.atom_values[i]);
}

TEST_CASE("non-zero m1: forward refuses, Picard contracts") {
    const auto p = make_problem(KernelModel::wave(), SigmaMap::affine(0.3, 1.0), {},
                                LevyMeasureSpec::gaussian_jump(5.0, 0.4, 0.5), 16);
    const auto c = sample_prm(p.noise, p.window, 3);
    CHECK_THROWS_AS(solve_forward(c, p), ConfigError);
    const auto r = picard_solve(c, p, 12, true);
    const auto& d = r.sup_differences;
    CHECK(d.back() < 1e-6 * d.front());
    // The fixed point satisfies the compensated mild equation on its own lattice.
    const auto sigma_grid = [&] {
        GridField g = r.path.grid;
        for (double& v : g.values()) v = p.sigma(v);
        return g;
    }();
    std::vector<double> s;
    for (double u : r.path.atom_values) s.push_back(p.sigma(u));
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double rhs = deterministic_part(p, c[k].t, c[k].x) +
                           stochastic_convolution(c, p.kernel, s, &sigma_grid, c[k].t, c[k].x, p.noise.m1());
        CHECK(r.path.atom_values[k] == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("existence diagnostics") {
    auto p = make_problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0), {}, LevyMeasureSpec::rademacher(5.0), 16);
    EnsembleParams ep;
    ep.n = 100;
    ep.n_iter = 6;
    ep.seed = 17;
    const auto rep = existence_diagnostics(p, ep);
    CHECK(rep.recursion_ok);
    CHECK(rep.summable_ok);
    CHECK(rep.bounded_ok);
    std::ostringstream os;
    write_existence_csv(os, rep);
    CHECK(os.str().rfind("n,t,H_n,bound,pass\n", 0) == 0);

    SUBCASE("worker count does not change the result") {
        ep.workers = 3;
        const auto rep3 = existence_diagnostics(p, ep);
        CHECK(rep3.H == rep.H);
        CHECK(rep3.K == rep.K);
    }
    SUBCASE("sigma constant: u_n = u_1 for n >= 1") {
        p.sigma = SigmaMap::constant(1.0);
        const auto r = existence_diagnostics(p, ep);
        for (std::size_t n = 2; n <= ep.n_iter; ++n)
            for (double h : r.H[n]) CHECK(h == 0.0);
        CHECK(r.recursion_ok);
    }
    SUBCASE("doubling v doubles H_1 on the same seeds") {
        auto q = p;
        q.noise = p.noise.scaled_jumps(std::sqrt(2.0));
        q.sigma = SigmaMap::constant(1.0);
        p.sigma = SigmaMap::constant(1.0);
        const auto a = existence_diagnostics(p, ep), b = existence_diagnostics(q, ep);
        for (std::size_t k = 0; k < a.times.size(); ++k)
            CHECK(b.H[1][k] == doctest::Approx(2.0 * a.H[1][k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(existence_diagnostics(p, EnsembleParams{10, 6, 1, 1, 3.0}), ConfigError);
}

TEST_CASE("solution CSV writers") {
    const auto p = make_problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0), {}, LevyMeasureSpec::rademacher(5.0), 4);
    const auto c = sample_prm(p.noise, p.window, 2);
    const auto path = solve_forward(c, p, true);
    std::ostringstream a, g;
    write_atoms_csv(a, c, path);
    write_grid_csv(g, path);
    CHECK(a.str().rfind("t,x,z,u\n", 0) == 0);
    CHECK(g.str().rfind("t,x,u\n", 0) == 0);
    const std::string grid = g.str();
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 17);
}

}  // TEST_SUITE
