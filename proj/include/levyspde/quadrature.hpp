#pragma once

#include <functional>
#include <span>
#include <vector>

namespace levyspde::quad {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;
/// Interior breakpoints of x ↦ f(t, x) for a fixed t (discontinuities, peaks).
using BreakFn = std::function<std::vector<double>(double)>;

/// Adaptive Gauss–Kronrod (61-point) on [a, b]; a and b may be infinite.
double integrate(const Fn1& f, double a, double b, double rel_tol = 1e-10);

/// Same, split at the sorted interior `breaks` that fall inside (a, b).
double integrate(const Fn1& f, double a, double b, std::span<const double> breaks,
                 double rel_tol = 1e-10);

/// Tensor-product adaptive rule over [t0,t1] × [x0,x1].
double integrate_2d(const Fn2& f, double t0, double t1, double x0, double x1,
                    const BreakFn& x_breaks = {}, std::span<const double> t_breaks = {},
                    double rel_tol = 1e-9);

}  // namespace levyspde::quad
