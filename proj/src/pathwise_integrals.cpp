#include "levyspde/pathwise_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyspde/errors.hpp"
#include "levyspde/quadrature.hpp"

namespace levyspde {

namespace {

constexpr double kQuadTol = 1e-9;

std::vector<double> merged(std::vector<double> a, std::span<const double> b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

Integrand::BreakFn merged_breaks(const Integrand::BreakFn& f, const Integrand::BreakFn& g) {
    if (!f) return g;
    if (!g) return f;
    return [f, g](double t) { return merged(f(t), g(t)); };
}

double integrate_box(const Integrand::Fn& fn, const SupportBox& box, const Integrand::BreakFn& xb,
                     std::span<const double> tb) {
    if (box.empty()) return 0.0;
    return quad::integrate_2d(fn, box.t0, box.t1, box.x0, box.x1, xb, tb, kQuadTol);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

SupportBox SupportBox::intersect(const SupportBox& o) const noexcept {
    return {std::max(t0, o.t0), std::min(t1, o.t1), std::max(x0, o.x0), std::min(x1, o.x1)};
}

SupportBox SupportBox::hull(const SupportBox& o) const noexcept {
    return {std::min(t0, o.t0), std::max(t1, o.t1), std::min(x0, o.x0), std::max(x1, o.x1)};
}

Integrand::Integrand(std::string name, Fn fn, SupportBox support, BreakFn x_breaks,
                     std::vector<double> t_breaks, double integral, double square_integral)
    : name_(std::move(name)), fn_(std::move(fn)), support_(support), x_breaks_(std::move(x_breaks)),
      t_breaks_(std::move(t_breaks)), integral_(integral), square_integral_(square_integral) {
    if (!std::isfinite(square_integral_) || !std::isfinite(integral_))
        throw ConfigError("integrand `" + name_ + "` is not square-integrable on the window");
}

Integrand::Integrand(std::string name, Fn fn, SupportBox support, BreakFn x_breaks,
                     std::vector<double> t_breaks)
    : name_(std::move(name)), fn_(std::move(fn)), support_(support), x_breaks_(std::move(x_breaks)),
      t_breaks_(std::move(t_breaks)) {
    std::sort(t_breaks_.begin(), t_breaks_.end());
    const Fn& f = fn_;
    integral_ = integrate_box(f, support_, x_breaks_, t_breaks_);
    square_integral_ = integrate_box([&f](double t, double x) { const double v = f(t, x); return v * v; },
                                     support_, x_breaks_, t_breaks_);
    if (!std::isfinite(square_integral_) || !std::isfinite(integral_))
        throw ConfigError("integrand `" + name_ + "` is not square-integrable on the window");
}

Integrand Integrand::constant(const SpaceTimeWindow& window, double c) {
    return indicator(window, {0.0, window.T(), -window.R(), window.R()}, c);
}

Integrand Integrand::indicator(const SpaceTimeWindow& window, SupportBox box, double c) {
    const SupportBox clipped = box.intersect({0.0, window.T(), -window.R(), window.R()});
    const double area = clipped.empty() ? 0.0 : (clipped.t1 - clipped.t0) * (clipped.x1 - clipped.x0);
    const SupportBox b = clipped;
    Fn fn = [b, c](double t, double x) {
        return (t >= b.t0 && t <= b.t1 && x >= b.x0 && x <= b.x1) ? c : 0.0;
    };
    BreakFn xb = [b](double) { return std::vector<double>{b.x0, b.x1}; };
    std::string name = "indicator[" + fmt(b.t0) + "," + fmt(b.t1) + "]x[" + fmt(b.x0) + "," + fmt(b.x1) + "]";
    if (c != 1.0) name = fmt(c) + "*" + name;
    return Integrand(std::move(name), std::move(fn), clipped, std::move(xb), {b.t0, b.t1}, c * area,
                     c * c * area);
}

Integrand Integrand::green(const SpaceTimeWindow& window, const KernelModel& kernel, double t0,
                           double x0) {
    if (!(t0 > 0.0)) throw DomainError("green integrand: requires t0 > 0");
    const double R = window.R();
    const double tmax = std::min(t0, window.T());
    const KernelModel k = kernel;
    Fn fn = [k, t0, x0](double t, double y) { return t < t0 ? k.evaluate(t0 - t, x0 - y) : 0.0; };
    BreakFn xb;
    if (k.kind() == KernelKind::Wave) {
        xb = [t0, x0](double t) { return std::vector<double>{x0 - (t0 - t), x0 + (t0 - t)}; };
    } else {
        xb = [t0, x0](double t) {
            const double s = std::sqrt(std::max(t0 - t, 0.0));
            return std::vector<double>{x0 - 8 * s, x0 - s, x0, x0 + s, x0 + 8 * s};
        };
    }
    // τ = t0 − t; both integrals reduce to one dimension with exact inner parts.
    const double tau_lo = t0 - tmax;
    const std::vector<double> tau_breaks{R - std::abs(x0), R + std::abs(x0)};
    auto mass = [&](double tau) { return tau > 0.0 ? k.segment_integral(tau, x0, -R, R, 1.0, 1.0) : 0.0; };
    const double integral = quad::integrate(mass, tau_lo, t0, tau_breaks, kQuadTol);
    // ∫ J·1_[−R,R] = ν − ∫ (J − truncated J); the deficit is bounded near τ = 0.
    auto deficit = [&](double tau) {
        return tau > 0.0 ? k.j_integral(tau) - k.truncated_square_integral(tau, x0, R) : 0.0;
    };
    const double square = (k.nu_t(t0) - k.nu_t(tau_lo)) -
                          quad::integrate(deficit, tau_lo, t0, tau_breaks, kQuadTol);
    std::string name = "G_" + std::string(k.name()) + "(" + fmt(t0) + "-t," + fmt(x0) + "-x)";
    return Integrand(std::move(name), std::move(fn), {0.0, tmax, -R, R}, std::move(xb), {tmax},
                     integral, square);
}

Integrand Integrand::combination(double alpha, const Integrand& h, double beta, const Integrand& g) {
    const Fn hf = h.fn_, gf = g.fn_;
    Fn fn = [alpha, beta, hf, gf](double t, double x) { return alpha * hf(t, x) + beta * gf(t, x); };
    const double cross = inner_product(h, g);
    const double integral = alpha * h.integral_ + beta * g.integral_;
    const double square = std::max(0.0, alpha * alpha * h.square_integral_ +
                                            beta * beta * g.square_integral_ +
                                            2.0 * alpha * beta * cross);
    return Integrand(fmt(alpha) + "*" + h.name_ + "+" + fmt(beta) + "*" + g.name_, std::move(fn),
                     h.support_.hull(g.support_), merged_breaks(h.x_breaks_, g.x_breaks_),
                     merged(h.t_breaks_, g.t_breaks_), integral, square);
}

Integrand Integrand::scaled(double c) const {
    const Fn f = fn_;
    return Integrand(fmt(c) + "*" + name_, [f, c](double t, double x) { return c * f(t, x); },
                     support_, x_breaks_, t_breaks_, c * integral_, c * c * square_integral_);
}

double inner_product(const Integrand& h, const Integrand& g) {
    const SupportBox box = h.support().intersect(g.support());
    if (box.empty()) return 0.0;
    auto prod = [&](double t, double x) { return h(t, x) * g(t, x); };
    return integrate_box(prod, box, merged_breaks(h.x_breaks(), g.x_breaks()),
                         merged(std::vector<double>(h.t_breaks().begin(), h.t_breaks().end()), g.t_breaks()));
}

double ito_integral(const PointConfiguration& config, const Integrand& h, const LevyMeasureSpec& spec) {
    // Neumaier-compensated jump sum.
    double sum = 0.0, comp = 0.0;
    for (const Atom& a : config.atoms()) {
        const double term = h(a.t, a.x) * a.z;
        const double s = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
    }
    sum += comp;
    if (spec.m1() != 0.0) sum -= spec.m1() * h.integral();
    return sum;
}

GridField::GridField(const SpaceTimeWindow& window, std::size_t n_t, std::size_t n_x, double fill)
    : n_t_(n_t), n_x_(n_x), R_(window.R()) {
    if (n_t < 2 || n_x < 2) throw ConfigError("grid: need at least 2 points per axis");
    dt_ = window.T() / static_cast<double>(n_t - 1);
    dx_ = 2.0 * window.R() / static_cast<double>(n_x - 1);
    values_.assign(n_t * n_x, fill);
}

double GridField::interpolate(double t, double x) const {
    const double ft = std::clamp(t / dt_, 0.0, static_cast<double>(n_t_ - 1));
    const double fx = std::clamp((x + R_) / dx_, 0.0, static_cast<double>(n_x_ - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(ft), n_t_ - 2);
    const std::size_t j = std::min(static_cast<std::size_t>(fx), n_x_ - 2);
    const double a = ft - static_cast<double>(k);
    const double b = fx - static_cast<double>(j);
    return (1 - a) * ((1 - b) * at(k, j) + b * at(k, j + 1)) +
           a * ((1 - b) * at(k + 1, j) + b * at(k + 1, j + 1));
}

double compensator_quadrature(const KernelModel& kernel, const GridField& field, double t, double x) {
    if (!(t > 0.0)) return 0.0;
    auto slice = [&](std::size_t k) {
        const double tau = t - field.time(k);
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < field.n_x(); ++j)
            acc += kernel.segment_integral(tau, x, field.space(j), field.space(j + 1), field.at(k, j),
                                           field.at(k, j + 1));
        return acc;
    };
    // Limit of the y-integral as s → t.
    double end_value = 0.0;
    if (kernel.kind() == KernelKind::Heat) {
        const double R = field.R();
        if (std::abs(x) < R) end_value = field.interpolate(t, x);
        else if (std::abs(x) == R) end_value = 0.5 * field.interpolate(t, x);
    }
    double total = 0.0;
    double prev_s = 0.0;
    double prev_v = slice(0);
    for (std::size_t k = 1; k < field.n_t() && field.time(k) < t; ++k) {
        const double v = slice(k);
        total += 0.5 * (field.time(k) - prev_s) * (prev_v + v);
        prev_s = field.time(k);
        prev_v = v;
    }
    total += 0.5 * (t - prev_s) * (prev_v + end_value);
    return total;
}

double stochastic_convolution(const PointConfiguration& config, const KernelModel& kernel,
                              std::span<const double> sigma_at_atoms, const GridField* sigma_on_grid,
                              double t, double x, double m1) {
    const std::size_t n_before = config.count_before(t);
    if (sigma_at_atoms.size() < n_before)
        throw ConfigError("stochastic_convolution: missing field values at atoms before t");
    double sum = 0.0;
    const auto atoms = config.atoms();
    for (std::size_t i = 0; i < n_before; ++i) {
        const Atom& a = atoms[i];
        const double s = sigma_at_atoms[i];
        if (s == 0.0) continue;
        sum += kernel.evaluate(t - a.t, x - a.x) * s * a.z;
    }
    if (m1 != 0.0) {
        if (sigma_on_grid == nullptr)
            throw ConfigError("stochastic_convolution: compensator needs grid values when m1 != 0");
        sum -= m1 * compensator_quadrature(kernel, *sigma_on_grid, t, x);
    }
    return sum;
}

EstimatorSummary isometry_test(const LevyMeasureSpec& spec, const Integrand& h,
                               const SpaceTimeWindow& window, std::size_t n, std::uint64_t seed,
                               unsigned workers) {
    if (n < 100) throw ConfigError("isometry_test: need N >= 100");
    const double target = spec.v() * h.square_integral();
    auto rows = run_ensemble(
        {n, seed, workers}, {"isometry:" + h.name()},
        [&](std::size_t, std::uint64_t s) {
            const auto config = sample_prm(spec, window, s);
            const double L = ito_integral(config, h, spec);
            return std::vector<double>{L * L};
        },
        {target});
    return rows.front();
}

}  // namespace levyspde
