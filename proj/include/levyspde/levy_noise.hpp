#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "levyspde/rng.hpp"

namespace levyspde {

enum class MeasureKind { TwoPoint, Discrete, GaussianJump, TruncatedPowerLaw };

/// (∫z²ν, ∫zν, ν(ℝ₀)).
struct Moments {
    double v = 0.0;
    double m1 = 0.0;
    double mass = 0.0;
};

/// A finite-activity Lévy jump measure ν on ℝ∖{0}.
///
/// Atomic kinds hold their atoms directly; density kinds hold the density
/// parameters and compute their moments once, by adaptive quadrature, at
/// construction. Values are immutable after construction.
class LevyMeasureSpec {
public:
    /// intensity · (½δ₊₁ + ½δ₋₁)
    static LevyMeasureSpec rademacher(double intensity = 1.0);
    /// intensity · (½δ_c + ½δ₋c)
    static LevyMeasureSpec two_point(double intensity, double jump);
    /// Σ weights[i]·δ_{atoms[i]}
    static LevyMeasureSpec discrete(std::vector<double> atoms, std::vector<double> weights);
    /// intensity · N(mean, sd²) density
    static LevyMeasureSpec gaussian_jump(double intensity, double mean = 0.0, double sd = 1.0);
    /// c·|z|^{-1-α} on eps ≤ |z| ≤ z_max, the small-jump truncation of an
    /// α-stable-like measure. The removed mass below eps is not compensated.
    static LevyMeasureSpec truncated_power_law(double c, double alpha, double eps, double z_max);

    MeasureKind kind() const noexcept { return kind_; }
    const Moments& moments() const noexcept { return moments_; }
    double v() const noexcept { return moments_.v; }
    double m1() const noexcept { return moments_.m1; }
    double total_mass() const noexcept { return moments_.mass; }
    bool is_atomic() const noexcept {
        return kind_ == MeasureKind::TwoPoint || kind_ == MeasureKind::Discrete;
    }
    bool is_zero() const noexcept { return moments_.mass == 0.0; }

    /// Atoms and weights; empty for density kinds.
    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Density of ν at z (zero for atomic kinds).
    double density(double z) const;

    /// One jump size from the normalized law ν / ν(ℝ₀).
    double sample_jump(Rng& rng) const;

    /// Image of ν under z ↦ factor·z (moments scale as factor², factor, 1).
    LevyMeasureSpec scaled_jumps(double factor) const;

    /// Single-line human-readable description, stable across runs.
    std::string describe() const;

private:
    LevyMeasureSpec() = default;
    void finalize();

    MeasureKind kind_ = MeasureKind::Discrete;
    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    // Density parameters. Gaussian: (intensity, mean, sd). Power law: (c, alpha, eps, z_max).
    double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    Moments moments_{};
};

/// The moments of ν; exact for atoms, quadrature (rel. tol 1e-10) for densities.
inline Moments moments(const LevyMeasureSpec& spec) { return spec.moments(); }

/// [0,T] × [−R,R].
class SpaceTimeWindow {
public:
    SpaceTimeWindow(double T, double R);
    double T() const noexcept { return T_; }
    double R() const noexcept { return R_; }
    double volume() const noexcept { return 2.0 * R_ * T_; }
    bool contains(double t, double x) const noexcept {
        return t > 0.0 && t < T_ && x >= -R_ && x <= R_;
    }

private:
    double T_;
    double R_;
};

struct Atom {
    double t;
    double x;
    double z;
};

/// One realization of the Poisson random measure restricted to a window.
/// Atoms are sorted by strictly increasing time and carry non-zero jumps.
class PointConfiguration {
public:
    PointConfiguration(SpaceTimeWindow window, std::vector<Atom> atoms, std::uint64_t seed = 0);

    const SpaceTimeWindow& window() const noexcept { return window_; }
    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Number of atoms with time strictly below t.
    std::size_t count_before(double t) const noexcept;
    bool has_time(double t) const noexcept;

private:
    SpaceTimeWindow window_;
    std::vector<Atom> atoms_;
    std::uint64_t seed_;
};

/// Samples N restricted to the window. Deterministic in (spec, window, seed).
PointConfiguration sample_prm(const LevyMeasureSpec& spec, const SpaceTimeWindow& window,
                              std::uint64_t seed);

/// Returns config + δ_point. Throws ConfigError on a time collision or an
/// out-of-window / zero-jump point.
PointConfiguration add_atom(const PointConfiguration& config, const Atom& point);

/// Returns config with atom `index` removed.
PointConfiguration remove_atom(const PointConfiguration& config, std::size_t index);

/// CSV `t,x,z`, 17 significant digits.
void write_configuration_csv(std::ostream& out, const PointConfiguration& config);
PointConfiguration read_configuration_csv(std::istream& in, const SpaceTimeWindow& window,
                                          std::uint64_t seed = 0);

/// Sidecar `key=value` record: window, measure, seed.
void write_configuration_metadata(std::ostream& out, const PointConfiguration& config,
                                  const LevyMeasureSpec& spec);

}  // namespace levyspde
