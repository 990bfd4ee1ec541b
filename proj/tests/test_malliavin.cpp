#include <cmath>
#include <sstream>

#include "doctest.h"
#include "levyspde/errors.hpp"
#include "levyspde/malliavin.hpp"
#include "oracles.hpp"

using namespace levyspde;

namespace {

const SpaceTimeWindow kWindow(1.0, 2.0);

ProblemSpec problem(KernelModel k, SigmaMap s, LevyMeasureSpec noise = LevyMeasureSpec::rademacher(5.0)) {
    return ProblemSpec{k, std::move(s), InitialData{}, kWindow, std::move(noise), 16, 16};
}

Integrand bump() {
    return Integrand("bump", [](double t, double x) { return std::exp(-x * x) * (1.0 + t); }, {0, 1, -2, 2});
}

}  // namespace

TEST_SUITE("malliavin") {

TEST_CASE("difference derivative of linear and constant functionals") {
    const auto noise = LevyMeasureSpec::gaussian_jump(3.0, 0.5, 1.0);  // compensator present
    const auto h = bump();
    const auto L = PathFunctional::linear(h, noise);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto c = sample_prm(noise, kWindow, rng());
        const auto p = random_point(noise, kWindow, rng);
        const double hz = h(p.r, p.xi) * p.z;
        CHECK(difference_derivative(L, c, p) == doctest::Approx(hz).epsilon(1e-12).scale(1.0));
        CHECK(difference_derivative(PathFunctional::constant(4.0), c, p) == 0.0);
        // Linearity of D on the registered family.
        const auto E = PathFunctional::exponential(h, noise);
        const double lhs = difference_derivative(PathFunctional::combination(2.0, L, -3.0, E), c, p);
        const double rhs = 2.0 * difference_derivative(L, c, p) - 3.0 * difference_derivative(E, c, p);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0 + std::abs(E(c))));
    }
    const PointConfiguration c(kWindow, {{0.5, 0.0, 1.0}});
    CHECK_THROWS_AS(difference_derivative(L, c, {0.5, 1.0, 1.0}), ConfigError);
}

TEST_CASE("exponential formula and chain rule") {
    const auto noise = LevyMeasureSpec::rademacher(5.0);
    const auto exp_rep = exp_derivative_check(bump(), noise, kWindow, 100, 9);
    CHECK(exp_rep.pass());
    CHECK(exp_rep.worst_residual() <= 1e-12);
    const auto chain = chain_rule_check(bump(), noise, kWindow, 100, 9);
    CHECK(chain.pass());
    for (const auto& r : chain.rows)
        if (r.check == "chain-rule:identity") CHECK(r.residual <= 1e-15);
    // g = exp reproduces the exponential formula.
    Rng rng(4);
    const auto c = sample_prm(noise, kWindow, 5);
    const auto p = random_point(noise, kWindow, rng);
    const auto L = PathFunctional::linear(bump(), noise);
    const double hz = bump()(p.r, p.xi) * p.z;
    const auto cr = chain_rule_residual([](double x) { return std::exp(x); }, L, hz, c, p);
    CHECK(cr.rhs == doctest::Approx(std::exp(L(c)) * std::expm1(hz)).epsilon(1e-13));
    std::ostringstream os;
    write_check_csv(os, chain);
    CHECK(os.str().rfind("check,params,lhs,rhs,residual_or_z,pass\n", 0) == 0);
}

TEST_CASE("duality formula") {
    const auto noise = LevyMeasureSpec::rademacher(1.0);
    const auto h = Integrand::indicator(kWindow, {0, 1, -1, 1});
    const auto disjoint = Integrand::indicator(kWindow, {0, 1, 1.5, 2});
    const auto a = duality_test(h, h, noise, kWindow, 10000, 31);
    CHECK(*a.target == doctest::Approx(2.0));
    CHECK(a.within(3.0));
    const auto b = duality_test(h, disjoint, noise, kWindow, 10000, 32);
    CHECK(*b.target == 0.0);
    CHECK(b.within(3.0));
    // Bilinearity of the exact side.
    const auto c = duality_test(h, h.scaled(2.5), noise, kWindow, 100, 33);
    CHECK(*c.target == doctest::Approx(2.5 * *a.target).epsilon(1e-12));
}

TEST_CASE("derivative equation, affine sigma") {
    SUBCASE("sigma constant: Du = G b z exactly") {
        const auto p = problem(KernelModel::heat(), SigmaMap::constant(0.7));
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            const auto c = sample_prm(p.noise, kWindow, rng());
            const auto pt = random_point(p.noise, kWindow, rng);
            const double t = pt.r + 0.5 * (1.0 - pt.r), x = 0.1;
            const auto r = derivative_equation_residual(p, c, pt, t, x);
            CHECK(r.lhs == doctest::Approx(oracle::heat_g(t - pt.r, x - pt.xi) * 0.7 * pt.z).epsilon(1e-12).scale(1.0));
        }
    }
    SUBCASE("heat kernel, non-dyadic coefficients") {
        const auto p = problem(KernelModel::heat(), SigmaMap::affine(0.3, 0.7));
        const auto rep = derivative_equation_check(p, 100, 12);
        CHECK(rep.pass());
        CHECK(rep.worst_residual() > 0.0);  // rounding is visible, so the check is not vacuous
    }
    SUBCASE("wave kernel") {
        const auto p = problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0));
        CHECK(derivative_equation_check(p, 100, 13).pass());
    }
    SUBCASE("future point is the trivial branch") {
        const auto p = problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0));
        const auto c = sample_prm(p.noise, kWindow, 2);
        const auto r = derivative_equation_residual(p, c, {0.9, 0.0, 1.0}, 0.4, 0.0);
        CHECK(r.trivial);
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs == 0.0);
    }
    SUBCASE("guards") {
        const auto c = sample_prm(LevyMeasureSpec::rademacher(5.0), kWindow, 2);
        CHECK_THROWS_AS(derivative_equation_residual(problem(KernelModel::wave(), SigmaMap::sine()), c,
                                                     {0.3, 0, 1}, 0.5, 0),
                        ConfigError);
        CHECK_THROWS_AS(derivative_equation_residual(problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0),
                                                             LevyMeasureSpec::gaussian_jump(1.0, 0.2)),
                                                     c, {0.3, 0, 1}, 0.5, 0),
                        ConfigError);
    }
}

TEST_CASE("adaptedness: adding a future atom leaves the past alone") {
    for (const auto k : {KernelModel::wave(), KernelModel::heat()}) {
        const auto rep = adaptedness_check(problem(k, SigmaMap::sine()), 100, 5);
        CHECK(rep.pass());
        CHECK(rep.worst_residual() == 0.0);
    }
}

TEST_CASE("derivative of Picard iterates") {
    const auto p = problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0));
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        const auto c = sample_prm(p.noise, kWindow, rng());
        const auto pt = random_point(p.noise, kWindow, rng);
        const auto r = picard_derivative_recursion(p, c, pt, 8);
        CHECK(r.pass());
        CHECK(r.first_iterate_residual <= 1e-12);
        // Du_1 = G(t−r, x−ξ)σ(w)z at every atom, by hand; Du_0 = 0 so cauchy[0] = max|Du_1|.
        double du1 = 0.0;
        for (const auto& a : c.atoms())
            if (a.t > pt.r) du1 = std::max(du1, std::abs(oracle::wave_g(a.t - pt.r, a.x - pt.xi) * 1.5 * pt.z));
        CHECK(r.cauchy.front() == doctest::Approx(du1).scale(1.0));
    }
    // Non-affine σ: the difference-form recursion still holds pathwise.
    const auto q = problem(KernelModel::heat(), SigmaMap::sine());
    const auto c = sample_prm(q.noise, kWindow, 3);
    const auto r = picard_derivative_recursion(q, c, {0.2, 0.1, 1.0}, 10);
    CHECK(r.recursion_ok);
}

TEST_CASE("Monte Carlo bound on E||Du_n||^2") {
    DerivativeBoundParams bp;
    bp.n = 100;
    bp.n_iter = 4;
    bp.cells_r = 8;
    bp.cells_xi = 8;
    bp.seed = 3;
    // Targets inside the light-cone-safe region |x| + t <= R.
    bp.targets = {{0.5, 0.0}, {1.0, 0.5}, {0.75, -1.0}};

    SUBCASE("sigma zero") {
        const auto rep = derivative_bound_estimate(problem(KernelModel::wave(), SigmaMap::zero()), bp);
        for (std::size_t n = 1; n <= bp.n_iter; ++n)
            for (double a : rep.A[n]) CHECK(a == 0.0);
    }
    SUBCASE("sigma constant, first iterate: b^2 v nu_t") {
        const double b = 0.8;
        const auto p = problem(KernelModel::wave(), SigmaMap::constant(b));
        const auto rep = derivative_bound_estimate(p, bp);
        for (std::size_t m = 0; m < bp.targets.size(); ++m) {
            const double exact = b * b * p.noise.v() * p.kernel.nu_t(bp.targets[m].first);
            CHECK(std::abs(rep.A[1][m] - exact) <= 3.0 * rep.A_se[1][m] + 1e-12);
        }
        CHECK(rep.pass());
    }
    SUBCASE("affine sigma in the contraction regime") {
        const auto rep = derivative_bound_estimate(problem(KernelModel::wave(), SigmaMap::affine(0.5, 1.0)), bp);
        CHECK(rep.recursion_ok);
        CHECK(rep.bounded_ok);
    }
    bp.n = 10;
    CHECK_THROWS_AS(derivative_bound_estimate(problem(KernelModel::wave(), SigmaMap::zero()), bp), ConfigError);
}

TEST_CASE("nonlinear probe") {
    SUBCASE("affine sigma agrees with the affine checker") {
        const auto p = problem(KernelModel::heat(), SigmaMap::affine(0.3, 0.7));
        const auto c = sample_prm(p.noise, kWindow, 8);
        const DerivativePoint pt{0.25, 0.3, -1.0};
        const auto a = derivative_equation_residual(p, c, pt, 0.9, 0.1);
        const auto b = nonlinear_probe(p, c, pt, 0.9, 0.1);
        CHECK(b.lhs == a.lhs);
        CHECK(b.rhs_difference == doctest::Approx(a.rhs).epsilon(1e-13));
    }
    SUBCASE("|x| on a positive path is locally affine") {
        // Small symmetric jumps around u ≡ 5 keep the path away from the kink.
        auto p = problem(KernelModel::wave(), SigmaMap::abs_value(), LevyMeasureSpec::two_point(5.0, 0.2));
        p.initial = {InitialCondition::Constant, 5.0};
        Rng rng(6);
        for (int i = 0; i < 20; ++i) {
            const auto c = sample_prm(p.noise, kWindow, rng());
            const auto pt = random_point(p.noise, kWindow, rng);
            const double t = pt.r + 0.5 * (1.0 - pt.r);
            const auto r = nonlinear_probe(p, c, pt, t, 0.0);
            CHECK(r.residual_difference <= 1e-10 * (1.0 + std::abs(r.lhs)));
            CHECK(r.residual_linearized <= 1e-8 * (1.0 + std::abs(r.lhs)));
        }
    }
    SUBCASE("sine: report only") {
        const auto p = problem(KernelModel::wave(), SigmaMap::sine());
        const auto c = sample_prm(p.noise, kWindow, 9);
        const auto r = nonlinear_probe(p, c, {0.2, 0.0, 1.0}, 0.95, 0.1);
        CHECK(std::isfinite(r.residual_difference));
        CHECK(std::isfinite(r.residual_linearized));
    }
}

}  // TEST_SUITE
