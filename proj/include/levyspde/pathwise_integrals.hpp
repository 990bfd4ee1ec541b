#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "levyspde/ensemble.hpp"
#include "levyspde/green_kernels.hpp"
#include "levyspde/levy_noise.hpp"

namespace levyspde {

/// Axis-aligned support [t0,t1] × [x0,x1].
struct SupportBox {
    double t0, t1, x0, x1;
    bool empty() const noexcept { return !(t1 > t0) || !(x1 > x0); }
    SupportBox intersect(const SupportBox& o) const noexcept;
    SupportBox hull(const SupportBox& o) const noexcept;
};

/// A deterministic square-integrable integrand h(t, x) on the window.
///
/// ∫∫h and ∫∫h² are fixed at construction: closed forms for the built-in
/// shapes, adaptive quadrature (rel. tol 1e-9) otherwise. A non-finite ∫∫h²
/// rejects the integrand.
class Integrand {
public:
    using Fn = std::function<double(double, double)>;
    using BreakFn = std::function<std::vector<double>(double)>;

    /// Generic integrand; `x_breaks(t)` lists discontinuities of x ↦ h(t,x).
    Integrand(std::string name, Fn fn, SupportBox support, BreakFn x_breaks = {},
              std::vector<double> t_breaks = {});

    /// c on the whole window.
    static Integrand constant(const SpaceTimeWindow& window, double c = 1.0);
    /// c·1{(t,x) ∈ box}, clipped to the window.
    static Integrand indicator(const SpaceTimeWindow& window, SupportBox box, double c = 1.0);
    /// (t, y) ↦ G(t0 − t, x0 − y)·1{t < t0}, the integrand of the stochastic
    /// convolution at (t0, x0).
    static Integrand green(const SpaceTimeWindow& window, const KernelModel& kernel, double t0,
                           double x0);
    /// α·h + β·g; ∫∫ of the result from the parts, ⟨h,g⟩ by quadrature.
    static Integrand combination(double alpha, const Integrand& h, double beta, const Integrand& g);

    double operator()(double t, double x) const { return fn_(t, x); }
    const std::string& name() const noexcept { return name_; }
    const SupportBox& support() const noexcept { return support_; }
    double integral() const noexcept { return integral_; }
    double square_integral() const noexcept { return square_integral_; }
    const BreakFn& x_breaks() const noexcept { return x_breaks_; }
    std::span<const double> t_breaks() const noexcept { return t_breaks_; }

    Integrand scaled(double c) const;

private:
    Integrand(std::string name, Fn fn, SupportBox support, BreakFn x_breaks,
              std::vector<double> t_breaks, double integral, double square_integral);

    std::string name_;
    Fn fn_;
    SupportBox support_;
    BreakFn x_breaks_;
    std::vector<double> t_breaks_;
    double integral_ = 0.0;
    double square_integral_ = 0.0;
};

/// ⟨h, g⟩ = ∫∫ h·g over the overlap of their supports.
double inner_product(const Integrand& h, const Integrand& g);

/// Pathwise compensated integral L(h) = Σᵢ h(tᵢ,xᵢ)zᵢ − m1·∫∫h.
double ito_integral(const PointConfiguration& config, const Integrand& h,
                    const LevyMeasureSpec& spec);

/// Values of a field on the (n_t × n_x) lattice
///   t_k = k·T/(n_t−1),  x_j = −R + j·2R/(n_x−1).
class GridField {
public:
    GridField() = default;
    GridField(const SpaceTimeWindow& window, std::size_t n_t, std::size_t n_x, double fill = 0.0);

    std::size_t n_t() const noexcept { return n_t_; }
    std::size_t n_x() const noexcept { return n_x_; }
    double time(std::size_t k) const noexcept { return dt_ * static_cast<double>(k); }
    double space(std::size_t j) const noexcept { return -R_ + dx_ * static_cast<double>(j); }
    double dt() const noexcept { return dt_; }
    double dx() const noexcept { return dx_; }
    double R() const noexcept { return R_; }
    double T() const noexcept { return dt_ * static_cast<double>(n_t_ - 1); }

    double& at(std::size_t k, std::size_t j) { return values_[k * n_x_ + j]; }
    double at(std::size_t k, std::size_t j) const { return values_[k * n_x_ + j]; }
    std::span<const double> row(std::size_t k) const { return {values_.data() + k * n_x_, n_x_}; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Bilinear interpolation; arguments are clamped to the lattice.
    double interpolate(double t, double x) const;

private:
    std::size_t n_t_ = 0, n_x_ = 0;
    double dt_ = 0.0, dx_ = 0.0, R_ = 0.0;
    std::vector<double> values_;
};

/// ∫₀ᵗ∫_{−R}^{R} G(t−s, x−y)·F(s,y) dy ds with F the bilinear interpolant of
/// `field`. The y-integral of each linear piece is exact; s uses the
/// trapezoid rule on the lattice times below t plus the endpoint s = t.
double compensator_quadrature(const KernelModel& kernel, const GridField& field, double t, double x);

/// Σ_{tᵢ<t} G(t−tᵢ, x−xᵢ)·sᵢ·zᵢ − m1·∫∫G(t−s,x−y)·σ(u(s,y)), where sᵢ =
/// σ(u(tᵢ,xᵢ)) is supplied for at least every atom before t. The quadrature
/// term is skipped when m1 = 0, so that case is exact.
double stochastic_convolution(const PointConfiguration& config, const KernelModel& kernel,
                              std::span<const double> sigma_at_atoms,
                              const GridField* sigma_on_grid, double t, double x, double m1);

/// Monte Carlo estimate of E|L(h)|² against the exact v·∫∫h².
EstimatorSummary isometry_test(const LevyMeasureSpec& spec, const Integrand& h,
                               const SpaceTimeWindow& window, std::size_t n, std::uint64_t seed,
                               unsigned workers = 1);

}  // namespace levyspde
