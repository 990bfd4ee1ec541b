#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace levyspde {

enum class KernelKind { Wave, Heat };

/// Green function of the wave operator ∂²_t − ∂²_x or the heat operator
/// ∂_t − ½∂²_x on ℝ₊ × ℝ.
///
///   wave:  G(t,x) = ½·1{|x| ≤ t},            FG(t,·)(ξ) = sin(t|ξ|)/|ξ|
///   heat:  G(t,x) = (2πt)^{-1/2} e^{-x²/2t},  FG(t,·)(ξ) = e^{-tξ²/2}
///
/// Closed forms are used for J(t) = ∫G²(t,x)dx and ν_t = ∫₀ᵗ J(s)ds.
class KernelModel {
public:
    explicit constexpr KernelModel(KernelKind kind) noexcept : kind_(kind) {}
    static constexpr KernelModel wave() noexcept { return KernelModel(KernelKind::Wave); }
    static constexpr KernelModel heat() noexcept { return KernelModel(KernelKind::Heat); }
    static KernelModel parse(std::string_view name);

    KernelKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return kind_ == KernelKind::Wave ? "wave" : "heat"; }

    /// G(t,x); throws DomainError for t <= 0.
    double evaluate(double t, double x) const;
    /// FG(t,·)(ξ) for t >= 0.
    double fourier(double t, double xi) const;
    /// J(t) = ∫_ℝ G²(t,x) dx; throws DomainError for t <= 0.
    double j_integral(double t) const;
    /// ν_t = ∫₀ᵗ J(s) ds for t >= 0.
    double nu_t(double t) const;
    /// ∫₀ᵗ s·J(s) ds, used with nu_t for exact product integration against J.
    double j_first_moment(double t) const;
    /// ∫₀ᵗ f(s) J(t−s) ds for f linear on [s0, s1] ⊂ [0, t], f(s0)=f0, f(s1)=f1.
    double j_convolution_segment(double t, double s0, double s1, double f0, double f1) const;

    /// ∫_{y0}^{y1} G(τ, x−y)·ℓ(y) dy with ℓ linear, ℓ(y0)=f0, ℓ(y1)=f1; exact.
    double segment_integral(double tau, double x, double y0, double y1, double f0,
                            double f1) const;
    /// ∫_{−R}^{R} G²(τ, x−y) dy; exact.
    double truncated_square_integral(double tau, double x, double R) const;
    /// Upper bound on ∫_{|y|>R} G(τ, x−y) dy for τ ≤ T: zero for the wave
    /// kernel when R ≥ |x| + T, exp(−(R−|x|)²/(2T)) for heat.
    double truncation_bound(double T, double x, double R) const;

private:
    KernelKind kind_;
};

/// Grids for the numeric check of the continuity and domination hypotheses on FG.
struct H2Grid {
    double xi_max = 50.0;      ///< frequency half-range of the base grid
    std::size_t n_xi = 2001;   ///< frequency points on [−xi_max, xi_max]
    std::size_t n_t = 64;      ///< time cells on [0, T] (midpoint nodes)
    std::size_t n_h = 11;      ///< shift samples h ∈ [0, ε] for the sup defining k_t
    double continuity_step = 1e-6;  ///< base step of the two-scale continuity probe
};

struct H2Row {
    std::string clause;
    std::string quantity;
    double value;
    bool pass;
};

struct H2Report {
    std::vector<H2Row> rows;
    bool resolution_ok = true;
    bool pass_a = false;
    bool pass_b = false;
    bool pass_c = false;
    bool pass() const noexcept { return resolution_ok && pass_a && pass_b && pass_c; }
};

/// Numerically checks (a) ν_T < ∞, (b) t ↦ FG(t,·)(ξ) continuous at every
/// grid node, (c) k_t(ξ) = sup_{h∈[0,ε]} |FG(t+h)(ξ) − FG(t)(ξ)| has a finite,
/// converging squared integral over [0,T] × ℝ. The certificate covers this
/// particular k_t only.
H2Report check_h2(const KernelModel& kernel, double T, double eps, const H2Grid& grid = {});

/// CSV `clause,quantity,value,pass`.
void write_h2_csv(std::ostream& out, const H2Report& report);

}  // namespace levyspde
