#include "levyspde/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace levyspde::quad {

namespace {

constexpr unsigned kMaxDepth = 18;

double gk(const Fn1& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    return Rule::integrate(f, a, b, kMaxDepth, rel_tol);
}

}  // namespace

double integrate(const Fn1& f, double a, double b, double rel_tol) {
    return gk(f, a, b, rel_tol);
}

double integrate(const Fn1& f, double a, double b, std::span<const double> breaks,
                 double rel_tol) {
    double lo = a;
    double total = 0.0;
    for (double c : breaks) {
        if (!(c > lo) || !(c < b)) continue;
        total += gk(f, lo, c, rel_tol);
        lo = c;
    }
    total += gk(f, lo, b, rel_tol);
    return total;
}

double integrate_2d(const Fn2& f, double t0, double t1, double x0, double x1,
                    const BreakFn& x_breaks, std::span<const double> t_breaks, double rel_tol) {
    auto inner = [&](double t) {
        auto slice = [&](double x) { return f(t, x); };
        if (x_breaks) {
            auto b = x_breaks(t);
            std::sort(b.begin(), b.end());
            return integrate(slice, x0, x1, b, rel_tol);
        }
        return gk(slice, x0, x1, rel_tol);
    };
    return integrate(inner, t0, t1, t_breaks, rel_tol);
}

}  // namespace levyspde::quad
