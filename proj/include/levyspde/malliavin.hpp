#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "levyspde/ensemble.hpp"
#include "levyspde/levy_noise.hpp"
#include "levyspde/pathwise_integrals.hpp"
#include "levyspde/solver.hpp"

namespace levyspde {

/// The extra atom (r, ξ, z) of D_{r,ξ,z}.
struct DerivativePoint {
    double r;
    double xi;
    double z;
};

/// A deterministic map from a point configuration to ℝ.
class PathFunctional {
public:
    using Fn = std::function<double(const PointConfiguration&)>;

    PathFunctional(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    static PathFunctional constant(double c);
    /// L(h) against the given jump law (including its compensator).
    static PathFunctional linear(const Integrand& h, const LevyMeasureSpec& noise);
    /// exp(L(h)).
    static PathFunctional exponential(const Integrand& h, const LevyMeasureSpec& noise);
    /// u(t, x) from the exact forward solve; requires m1 = 0.
    static PathFunctional solution_at(const ProblemSpec& problem, double t, double x);
    /// g ∘ F.
    static PathFunctional compose(std::string g_name, std::function<double(double)> g,
                                  const PathFunctional& F);
    /// αF + βG.
    static PathFunctional combination(double alpha, const PathFunctional& F, double beta,
                                      const PathFunctional& G);

    double operator()(const PointConfiguration& config) const { return fn_(config); }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    Fn fn_;
};

/// F(config + δ_point) − F(config). Throws ConfigError if the point is
/// outside the window, has z = 0, or shares a time with an atom.
double difference_derivative(const PathFunctional& F, const PointConfiguration& config,
                             const DerivativePoint& point);

/// One row of a Malliavin verification report.
struct CheckRow {
    std::string check;
    std::string params;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  ///< residual, or studentized discrepancy for MC checks
    bool pass = false;
};

struct CheckReport {
    std::vector<CheckRow> rows;
    bool pass() const noexcept;
    double worst_residual() const noexcept;
};

/// CSV `check,params,lhs,rhs,residual_or_z,pass`.
void write_check_csv(std::ostream& out, const CheckReport& report);

struct ChainRuleResidual {
    double lhs;       ///< D(g∘F)
    double rhs;       ///< g(F + DF) − g(F)
    double residual;  ///< |lhs − rhs|
    double scale;     ///< 1 + |g(F)| + |g(F + DF)|
};

/// Compares D(g∘F) with g(F + DF) − g(F), where DF is supplied by the caller
/// (for F = L(h) pass h(r,ξ)z, the hand formula).
ChainRuleResidual chain_rule_residual(const std::function<double(double)>& g, const PathFunctional& F,
                                      double DF, const PointConfiguration& config,
                                      const DerivativePoint& point);

/// Relative residual of D e^{L(h)} = e^{L(h)}(e^{h(r,ξ)z} − 1), normalized
/// by e^{L(h)} + e^{L(h)+h(r,ξ)z}.
double exp_derivative_residual(const Integrand& h, const LevyMeasureSpec& noise,
                               const PointConfiguration& config, const DerivativePoint& point);

/// A uniformly drawn point of U = (0,T) × [−R,R] × supp ν, jump from ν.
DerivativePoint random_point(const LevyMeasureSpec& noise, const SpaceTimeWindow& window, Rng& rng);

/// Batches of random (config, point) draws; one row per draw (and map).
CheckReport exp_derivative_check(const Integrand& h, const LevyMeasureSpec& noise,
                                 const SpaceTimeWindow& window, std::size_t draws,
                                 std::uint64_t seed, double tol = 1e-12);
/// g ∈ {identity, x², exp, sin}, F = L(h).
CheckReport chain_rule_check(const Integrand& h, const LevyMeasureSpec& noise,
                             const SpaceTimeWindow& window, std::size_t draws, std::uint64_t seed,
                             double tol = 1e-12);

/// E[L(h)L(g)] by Monte Carlo against v⟨h,g⟩.
EstimatorSummary duality_test(const Integrand& h, const Integrand& g, const LevyMeasureSpec& noise,
                              const SpaceTimeWindow& window, std::size_t n, std::uint64_t seed,
                              unsigned workers = 1);

struct DerivativeEquationResidual {
    double lhs;       ///< Du(t,x) by differencing two solves
    double rhs;       ///< G(t−r,x−ξ)σ(u(r,ξ))z + Σ_{r<tᵢ<t} G(t−tᵢ,x−xᵢ)·a·Duᵢ·zᵢ
    double residual;  ///< |lhs − rhs|
    bool trivial;     ///< r ≥ t branch: rhs is 0 by adaptedness
};

/// Pathwise check of the derivative equation for affine σ(x) = ax + b, m1 = 0.
DerivativeEquationResidual derivative_equation_residual(const ProblemSpec& problem,
                                                        const PointConfiguration& config,
                                                        const DerivativePoint& point, double t,
                                                        double x);

/// Random draws of (config, point, t, x) with t > r.
CheckReport derivative_equation_check(const ProblemSpec& problem, std::size_t draws,
                                      std::uint64_t seed, double rel_tol = 1e-10);
/// D of u(t,x) with r ≥ t is exactly zero.
CheckReport adaptedness_check(const ProblemSpec& problem, std::size_t draws, std::uint64_t seed);

struct PicardDerivativeReport {
    /// max over atoms of |RHS − Du_{n}| with RHS from Du_{n−1}, n = 1..n_iter
    std::vector<double> recursion_residuals;
    /// max over atoms of |Du_{n+1} − Du_n|, n = 0..n_iter−1
    std::vector<double> cauchy;
    double first_iterate_residual = 0.0;  ///< max over atoms of |Du₁ − Gσ(w)z|
    bool recursion_ok = false;
    bool first_ok = false;
    bool decay_ok = false;
    bool pass() const noexcept { return recursion_ok && first_ok && decay_ok; }
};

/// Differences the Picard iterates with and without the point, checks the
/// iterate derivative equation at every atom and n, and that the Cauchy
/// differences decay: the envelope max_{m≥n} d_m shrinks at a mean
/// geometric rate ≤ ρ.
PicardDerivativeReport picard_derivative_recursion(const ProblemSpec& problem,
                                                   const PointConfiguration& config,
                                                   const DerivativePoint& point,
                                                   std::size_t n_iter, double rho = 0.9);

struct DerivativeBoundParams {
    std::size_t n = 100;        ///< realizations
    std::size_t n_iter = 8;
    std::size_t cells_r = 32;   ///< stratification of (r, ξ)
    std::size_t cells_xi = 32;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double z_slack = 3.0;
    /// (t, x) targets; empty = a 4 × 5 lattice of the window
    std::vector<std::pair<double, double>> targets;
};

struct DerivativeBoundReport {
    std::vector<std::pair<double, double>> targets;
    std::vector<std::vector<double>> A;     ///< Â[n][target] estimate of E‖Du_n(t,x)‖²_H
    std::vector<std::vector<double>> A_se;
    std::vector<double> A_sup;              ///< max over targets
    std::vector<double> K;                  ///< K̂_n from the same realizations
    std::vector<std::vector<double>> bound; ///< recursion bound for A[n+1]
    bool recursion_ok = false;
    bool bounded_ok = false;
    bool pass() const noexcept { return recursion_ok && bounded_ok; }
};

/// Monte Carlo over realizations and stratified derivative points. The
/// H-norm integral sums the z-atoms of ν with their weights (atomic ν
/// required) and averages a jittered point per (r, ξ) cell.
DerivativeBoundReport derivative_bound_estimate(const ProblemSpec& problem,
                                                const DerivativeBoundParams& params);

struct NonlinearProbeResult {
    double lhs;                  ///< Du(t,x)
    double rhs_difference;       ///< Gσ(u(r,ξ))z + Σ G·[σ(uᵢ + Duᵢ) − σ(uᵢ)]·zᵢ
    double rhs_linearized;       ///< Gσ(u(r,ξ))z + Σ G·σ'(uᵢ)Duᵢ·zᵢ, σ' by central difference
    double residual_difference;
    double residual_linearized;
};

/// Report-only: evaluates both readings of the derivative equation for a
/// general Lipschitz σ.
NonlinearProbeResult nonlinear_probe(const ProblemSpec& problem, const PointConfiguration& config,
                                     const DerivativePoint& point, double t, double x);

}  // namespace levyspde
