#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyspde/green_kernels.hpp"
#include "levyspde/levy_noise.hpp"
#include "levyspde/pathwise_integrals.hpp"

namespace levyspde {

/// A Lipschitz multiplicative term σ with declared constants
///   |σ(x) − σ(y)| ≤ C_σ|x − y|,   |σ(x)| ≤ D_σ(1 + |x|),  D_σ = max(C_σ, |σ(0)|).
class SigmaMap {
public:
    struct Affine {
        double a;
        double b;
    };
    using Fn = std::function<double(double)>;

    SigmaMap(std::string name, Fn fn, double lipschitz, std::optional<Affine> affine = std::nullopt);

    static SigmaMap affine(double a, double b);
    static SigmaMap zero() { return affine(0.0, 0.0); }
    static SigmaMap constant(double b) { return affine(0.0, b); }
    static SigmaMap abs_value();
    static SigmaMap sine();
    /// `affine`, `zero`, `const`, `abs`, `sin`; a and b feed affine/const.
    static SigmaMap parse(const std::string& name, double a, double b);

    double operator()(double u) const { return fn_(u); }
    const std::string& name() const noexcept { return name_; }
    double lipschitz() const noexcept { return lipschitz_; }
    double growth() const noexcept { return growth_; }
    const std::optional<Affine>& affine_tag() const noexcept { return affine_; }
    bool is_affine() const noexcept { return affine_.has_value(); }

    /// Checks the declared constants (and affine tag) on random pairs.
    bool spot_check(Rng& rng, std::size_t pairs = 1000) const;

private:
    std::string name_;
    Fn fn_;
    double lipschitz_;
    double growth_;
    std::optional<Affine> affine_;
};

enum class InitialCondition {
    Constant,  ///< u₀ ≡ c (both kernels; also v₀ = 0 for the wave kernel)
    Cosine,    ///< heat, u₀ = cos
    WavePair,  ///< wave, u₀ = cos, v₀ = 0
};

struct InitialData {
    InitialCondition kind = InitialCondition::Constant;
    double c = 1.0;
    static InitialData parse(const std::string& name, double c);
};

struct ProblemSpec {
    KernelModel kernel;
    SigmaMap sigma;
    InitialData initial;
    SpaceTimeWindow window;
    LevyMeasureSpec noise;
    std::size_t n_t = 64;
    std::size_t n_x = 64;
};

/// Solved realization: u at every atom and on the (n_t × n_x) lattice.
struct SolutionPath {
    std::vector<double> atom_values;
    GridField grid;
    bool has_grid = false;
    std::string solver;  ///< "forward" or "picard(n)"
    std::uint64_t seed = 0;
};

/// w(t, x), the solution of the homogeneous equation.
double deterministic_part(const ProblemSpec& problem, double t, double x);
/// Declared sup |w| on the window.
double initial_bound(const ProblemSpec& problem);
/// sup |w| over the lattice is within the declared bound.
bool check_h1(const ProblemSpec& problem);

/// w(t,x) + Σ_{tᵢ<t} G(t−tᵢ, x−xᵢ)σ(uᵢ)zᵢ from given atom values (m1 = 0 form).
double mild_value(const PointConfiguration& config, const ProblemSpec& problem,
                  std::span<const double> atom_values, double t, double x);

/// Exact forward substitution over atoms in time order; requires m1 = 0.
SolutionPath solve_forward(const PointConfiguration& config, const ProblemSpec& problem,
                           bool fill_grid = true);

/// max over atoms of |u(atom) − right side re-evaluated from the solved values|.
double mild_residual(const PointConfiguration& config, const ProblemSpec& problem,
                     const SolutionPath& path);

struct PicardResult {
    SolutionPath path;
    /// d_n = max_atoms |u_n − u_{n−1}| for n = 1..n_iter.
    std::vector<double> sup_differences;
};

/// n_iter Picard steps from u₀ = w. For m1 ≠ 0 each step also carries the
/// lattice, which feeds the compensator quadrature.
PicardResult picard_solve(const PointConfiguration& config, const ProblemSpec& problem,
                          std::size_t n_iter, bool fill_grid = true);

/// All iterates u₀..u_{n_iter} at atoms (and on the lattice when requested).
struct PicardTrace {
    std::vector<std::vector<double>> atoms;
    std::vector<GridField> grids;
};
PicardTrace picard_trace(const PointConfiguration& config, const ProblemSpec& problem,
                         std::size_t n_iter, bool with_grids);

struct EnsembleParams {
    std::size_t n = 100;
    std::size_t n_iter = 10;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double z_slack = 3.0;  ///< standard errors of slack in statistical bounds
};

struct ExistenceRow {
    std::size_t n;
    double t;
    double h;
    double bound;
    bool pass;
};

/// Monte Carlo view of the existence proof: Ĥ_n(t) = grid-sup_x E|u_n − u_{n−1}|².
struct ExistenceReport {
    std::vector<double> times;
    std::vector<std::vector<double>> H;        ///< H[n][k], n = 0 unused
    std::vector<std::vector<double>> H_se;     ///< standard error at the maximizing x
    std::vector<std::vector<double>> bound;    ///< recursion bound for H[n]
    std::vector<std::vector<double>> slack;    ///< statistical slack used with bound
    std::vector<double> K;                     ///< K̂_n = grid-sup E|u_n|², n = 0..n_iter
    std::vector<double> sup_sqrt_H;            ///< sup_t √Ĥ_n
    std::vector<double> ratios;                ///< sup_sqrt_H[n+1]/sup_sqrt_H[n], n ≥ 1
    double vc2 = 0.0;                          ///< v·C_σ²
    std::vector<ExistenceRow> rows;
    bool recursion_ok = false;
    bool summable_ok = false;
    bool bounded_ok = false;
    bool pass() const noexcept { return recursion_ok && summable_ok && bounded_ok; }
};

ExistenceReport existence_diagnostics(const ProblemSpec& problem, const EnsembleParams& params);

/// CSV `t,x,z,u` and `t,x,u`.
void write_atoms_csv(std::ostream& out, const PointConfiguration& config, const SolutionPath& path);
void write_grid_csv(std::ostream& out, const SolutionPath& path);
/// CSV `n,t,H_n,bound,pass`.
void write_existence_csv(std::ostream& out, const ExistenceReport& report);

}  // namespace levyspde
