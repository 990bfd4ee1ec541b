#pragma once

// Test-only reference computations, written independently of the library's
// closed forms and quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "levyspde/levy_noise.hpp"
#include "levyspde/solver.hpp"

namespace oracle {

/// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

/// Simpson over pieces split at sorted interior points. Nodes are pulled a
/// hair inside each piece so a jump at a cut takes the piece's own side.
inline double simpson_pieces(const std::function<double(double)>& f, std::vector<double> cuts,
                             std::size_t n = 2000) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (!(b > a)) continue;
        const double d = 1e-13 * (b - a);
        s += simpson([&](double x) { return f(std::clamp(x, a + d, b - d)); }, a, b, n);
    }
    return s;
}

inline double simpson_2d(const std::function<double(double, double)>& f, double t0, double t1, double x0,
                         double x1, std::size_t n = 400) {
    return simpson([&](double t) { return simpson([&](double x) { return f(t, x); }, x0, x1, n); }, t0, t1, n);
}

/// Wave and heat Green functions written out directly.
inline double wave_g(double t, double x) { return std::abs(x) <= t ? 0.5 : 0.0; }
inline double heat_g(double t, double x) {
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
}

/// Affine σ(u) = a·u + b: the atom values solve the dense lower-triangular
/// system (I − A)u = w + b·g with A_{ki} = G_{ki}·a·z_i and g_k = Σ_i G_{ki} z_i,
/// where G_{ki} = G(t_k − t_i, x_k − x_i) for i < k. Gaussian elimination with
/// partial pivoting, no use of the triangular structure.
inline std::vector<double> affine_atoms_by_linear_solve(const levyspde::PointConfiguration& config,
                                                        const std::function<double(double, double)>& G,
                                                        const std::function<double(double, double)>& w, double a,
                                                        double b) {
    const std::size_t K = config.size();
    std::vector<std::vector<double>> M(K, std::vector<double>(K + 1, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        M[k][k] = 1.0;
        double rhs = w(config[k].t, config[k].x);
        for (std::size_t i = 0; i < K; ++i) {
            if (!(config[i].t < config[k].t)) continue;
            const double g = G(config[k].t - config[i].t, config[k].x - config[i].x);
            M[k][i] -= g * a * config[i].z;
            rhs += g * b * config[i].z;
        }
        M[k][K] = rhs;
    }
    for (std::size_t c = 0; c < K; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < K; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (std::size_t r = 0; r < K; ++r) {
            if (r == c || M[r][c] == 0.0) continue;
            const double f = M[r][c] / M[c][c];
            for (std::size_t j = c; j <= K; ++j) M[r][j] -= f * M[c][j];
        }
    }
    std::vector<double> u(K);
    for (std::size_t k = 0; k < K; ++k) u[k] = M[k][K] / M[k][k];
    return u;
}

}  // namespace oracle
