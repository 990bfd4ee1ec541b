#include "levyspde/green_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "levyspde/errors.hpp"

namespace levyspde {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double t, const char* what) {
    if (!(t > 0.0)) throw DomainError(std::string(what) + ": requires t > 0");
}

// Φ(b) − Φ(a) for the N(0, var) law.
double normal_mass(double a, double b, double var) {
    const double s = std::sqrt(2.0 * var);
    return 0.5 * (std::erf(b / s) - std::erf(a / s));
}

double normal_pdf(double u, double var) {
    return std::exp(-0.5 * u * u / var) / std::sqrt(2.0 * kPi * var);
}

}  // namespace

KernelModel KernelModel::parse(std::string_view name) {
    if (name == "wave") return wave();
    if (name == "heat") return heat();
    throw ConfigError("unknown kernel `" + std::string(name) + "` (expected wave|heat)");
}

double KernelModel::evaluate(double t, double x) const {
    require_positive(t, "G(t,x)");
    if (kind_ == KernelKind::Wave) return std::abs(x) <= t ? 0.5 : 0.0;
    return std::exp(-0.5 * x * x / t) / std::sqrt(2.0 * kPi * t);
}

double KernelModel::fourier(double t, double xi) const {
    if (t < 0.0) throw DomainError("FG(t,.): requires t >= 0");
    if (kind_ == KernelKind::Wave) {
        const double a = std::abs(xi);
        if (a * t < 1e-8) return t * (1.0 - (a * t) * (a * t) / 6.0);
        return std::sin(t * a) / a;
    }
    return std::exp(-0.5 * t * xi * xi);
}

double KernelModel::j_integral(double t) const {
    require_positive(t, "J(t)");
    if (kind_ == KernelKind::Wave) return 0.5 * t;
    return 1.0 / std::sqrt(4.0 * kPi * t);
}

double KernelModel::nu_t(double t) const {
    if (t < 0.0) throw DomainError("nu_t: requires t >= 0");
    if (kind_ == KernelKind::Wave) return 0.25 * t * t;
    return std::sqrt(t / kPi);
}

double KernelModel::j_first_moment(double t) const {
    if (t < 0.0) throw DomainError("j_first_moment: requires t >= 0");
    if (kind_ == KernelKind::Wave) return t * t * t / 6.0;
    return t * std::sqrt(t) / (3.0 * std::sqrt(kPi));
}

double KernelModel::j_convolution_segment(double t, double s0, double s1, double f0,
                                          double f1) const {
    if (!(s1 > s0)) return 0.0;
    // With τ = t − s, f = A − kτ on τ ∈ [t − s1, t − s0].
    const double k = (f1 - f0) / (s1 - s0);
    const double A = f0 + k * (t - s0);
    const double ta = std::max(0.0, t - s1);
    const double tb = std::max(0.0, t - s0);
    return A * (nu_t(tb) - nu_t(ta)) - k * (j_first_moment(tb) - j_first_moment(ta));
}

double KernelModel::segment_integral(double tau, double x, double y0, double y1, double f0,
                                     double f1) const {
    require_positive(tau, "segment_integral");
    if (!(y1 > y0)) return 0.0;
    const double k = (f1 - f0) / (y1 - y0);
    if (kind_ == KernelKind::Wave) {
        const double a = std::max(y0, x - tau);
        const double b = std::min(y1, x + tau);
        if (!(b > a)) return 0.0;
        const double la = f0 + k * (a - y0);
        const double lb = f0 + k * (b - y0);
        return 0.25 * (b - a) * (la + lb);
    }
    // u = y − x; ∫ φ_τ(u)(B + k u) du with ∫ u φ_τ = −τ φ_τ.
    const double ua = y0 - x, ub = y1 - x;
    const double B = f0 + k * (x - y0);
    return B * normal_mass(ua, ub, tau) + k * tau * (normal_pdf(ua, tau) - normal_pdf(ub, tau));
}

double KernelModel::truncated_square_integral(double tau, double x, double R) const {
    require_positive(tau, "truncated_square_integral");
    if (kind_ == KernelKind::Wave) {
        const double a = std::max(-R, x - tau);
        const double b = std::min(R, x + tau);
        return b > a ? 0.25 * (b - a) : 0.0;
    }
    // G²(τ,u) = J(τ)·N(0, τ/2) density.
    return j_integral(tau) * normal_mass(-R - x, R - x, 0.5 * tau);
}

double KernelModel::truncation_bound(double T, double x, double R) const {
    const double d = R - std::abs(x);
    if (kind_ == KernelKind::Wave) {
        if (d >= T) return 0.0;
        return 0.5 * (T - std::max(d, -T));
    }
    if (d <= 0.0) return 1.0;
    return std::exp(-d * d / (2.0 * T));
}

H2Report check_h2(const KernelModel& kernel, double T, double eps, const H2Grid& grid) {
    H2Report report;
    if (!(T > 0.0) || !(eps > 0.0)) throw DomainError("check_h2: requires T > 0 and eps > 0");
    if (grid.n_xi < 3 || grid.n_t < 2 || grid.n_h < 2 || !(grid.xi_max > 0.0) ||
        !(grid.continuity_step > 0.0)) {
        report.resolution_ok = false;
        report.rows.push_back({"grid", "insufficient_resolution", static_cast<double>(grid.n_xi), false});
        return report;
    }
    auto F = [&](double t, double xi) { return kernel.fourier(t, xi); };

    // (a) ν_T < ∞.
    const double nuT = kernel.nu_t(T);
    report.pass_a = std::isfinite(nuT);
    report.rows.push_back({"H2a", "nu_T", nuT, report.pass_a});

    const double dxi = 2.0 * grid.xi_max / static_cast<double>(grid.n_xi - 1);
    const std::size_t half = (grid.n_xi - 1) / 2;

    // (b) Two-scale modulus probe at every (t, ξ) node: a continuous function
    // has |F(t±δ/10) − F(t)| ≪ |F(t±δ) − F(t)|; a jump keeps both O(1).
    {
        const double d1 = grid.continuity_step, d2 = d1 / 10.0;
        double worst_ratio = 0.0;
        double worst_modulus = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k <= grid.n_t; ++k) {
            const double t = T * static_cast<double>(k) / static_cast<double>(grid.n_t);
            for (std::size_t i = 0; i < grid.n_xi; ++i) {
                const double xi = -grid.xi_max + dxi * static_cast<double>(i);
                const double f = F(t, xi);
                for (int side : {+1, -1}) {
                    if (side < 0 && t - d1 < 0.0) continue;
                    if (side > 0 && t + d1 > T) continue;
                    const double w1 = std::abs(F(t + side * d1, xi) - f);
                    const double w2 = std::abs(F(t + side * d2, xi) - f);
                    const bool good = std::isfinite(w1) && std::isfinite(w2) && w2 <= 0.2 * w1 + 1e-13;
                    ok = ok && good;
                    worst_modulus = std::max(worst_modulus, w2);
                    if (w1 > 1e-13) worst_ratio = std::max(worst_ratio, w2 / w1);
                }
            }
        }
        report.pass_b = ok;
        report.rows.push_back({"H2b", "max_modulus_ratio", worst_ratio, ok});
        report.rows.push_back({"H2b", "max_modulus_at_step", worst_modulus, ok});
    }

    // (c) k_t on midpoint times over nested frequency ranges Ξ, 2Ξ, 4Ξ.
    {
        const std::size_t n_wide = 4 * half;  // points per side of the 4Ξ grid
        const double dt = T / static_cast<double>(grid.n_t);
        double band[3] = {0.0, 0.0, 0.0};  // contributions of |ξ|≤Ξ, Ξ<|ξ|≤2Ξ, 2Ξ<|ξ|≤4Ξ
        double k_max = 0.0;
        for (std::size_t k = 0; k < grid.n_t; ++k) {
            const double t = (static_cast<double>(k) + 0.5) * dt;
            for (std::size_t i = 0; i <= n_wide; ++i) {
                const double xi = dxi * static_cast<double>(i);
                const double f = F(t, xi);
                double kt = 0.0;
                for (std::size_t m = 1; m < grid.n_h; ++m) {
                    const double h = eps * static_cast<double>(m) / static_cast<double>(grid.n_h - 1);
                    kt = std::max(kt, std::abs(F(t + h, xi) - f));
                }
                k_max = std::max(k_max, kt);
                // Trapezoid weights on each band; ξ and −ξ contribute equally.
                const double sym = (i == 0) ? 1.0 : 2.0;
                const double val = sym * kt * kt * dxi * dt;
                auto add = [&](std::size_t b, double w) { band[b] += w * val; };
                if (i < half) add(0, i == 0 ? 0.5 : 1.0);
                else if (i == half) { add(0, 0.5); add(1, 0.5); }
                else if (i < 2 * half) add(1, 1.0);
                else if (i == 2 * half) { add(1, 0.5); add(2, 0.5); }
                else if (i < n_wide) add(2, 1.0);
                else add(2, 0.5);
            }
        }
        const double base = band[0];
        const double tail1 = band[1];
        const double tail2 = band[2];
        const bool finite = std::isfinite(base) && std::isfinite(tail1) && std::isfinite(tail2);
        const bool converged = tail1 <= 1e-8 * (1.0 + base) || (tail2 <= 0.75 * tail1 && tail1 <= 0.5 * base);
        report.pass_c = finite && converged;
        report.rows.push_back({"H2c", "k_sup", k_max, finite});
        report.rows.push_back({"H2c", "int_k2_xi_max", base, finite});
        report.rows.push_back({"H2c", "int_k2_2xi_max", base + tail1, finite});
        report.rows.push_back({"H2c", "int_k2_4xi_max", base + tail1 + tail2, report.pass_c});
    }
    return report;
}

void write_h2_csv(std::ostream& out, const H2Report& report) {
    const auto old = out.precision(17);
    out << "clause,quantity,value,pass\n";
    for (const auto& r : report.rows)
        out << r.clause << ',' << r.quantity << ',' << r.value << ',' << (r.pass ? 1 : 0) << '\n';
    out.precision(old);
}

}  // namespace levyspde
