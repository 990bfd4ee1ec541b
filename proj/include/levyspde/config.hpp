#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "levyspde/levy_noise.hpp"
#include "levyspde/solver.hpp"

namespace levyspde {

struct Tolerances {
    double z_max = 3.0;        ///< studentized bound for Monte Carlo checks
    double exact = 1e-12;      ///< exact pathwise identities (relative)
    double derivative = 1e-10; ///< derivative equation, relative to 1 + |LHS|
    double cross = 1e-8;       ///< Picard vs forward substitution
    double quadrature = 1e-8;  ///< closed forms vs quadrature
};

/// Everything a CLI run needs. Keys of the flat `key = value` file (and of
/// the matching `--key value` flags):
///
///   kernel        wave | heat
///   sigma         affine | zero | const | abs | sin;  sigma_a, sigma_b
///   initial       constant | cosine | wave-pair;      initial_c
///   T, R, nt, nx  window and lattice
///   noise         rademacher | two-point | discrete | gaussian | power-law
///   intensity, jump, atoms, weights, mean, sd, c, alpha, eps, zmax
///   n, seed, workers, iters, grid, h2_eps, out
///   tol_z, tol_exact, tol_derivative, tol_cross, tol_quadrature
///
/// `atoms` and `weights` are comma-separated lists. `n = 0` picks the
/// per-command default. Lines starting with `#` are comments.
struct RunConfig {
    std::string kernel = "wave";
    std::string sigma = "affine";
    double sigma_a = 0.5;
    double sigma_b = 1.0;
    std::string initial = "constant";
    double initial_c = 1.0;
    double T = 1.0;
    double R = 2.0;
    std::size_t nt = 64;
    std::size_t nx = 64;

    std::string noise = "rademacher";
    double intensity = 5.0;
    double jump = 1.0;
    std::vector<double> atoms;
    std::vector<double> weights;
    double mean = 0.0;
    double sd = 1.0;
    double c = 1.0;
    double alpha = 0.5;
    double eps = 0.1;
    double zmax = 1.0;

    std::size_t n = 0;
    std::uint64_t seed = 7;
    unsigned workers = 1;
    std::size_t iters = 10;
    std::size_t grid = 4096;
    double h2_eps = 0.1;
    std::string out;  ///< output directory; empty = stdout

    Tolerances tol;

    SpaceTimeWindow window() const;
    LevyMeasureSpec noise_spec() const;
    ProblemSpec problem() const;
    /// n, or `fallback` when n = 0.
    std::size_t ensemble_size(std::size_t fallback) const { return n == 0 ? fallback : n; }
    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

/// Sets one key; throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Reads `key = value` lines into `config`.
void read_config(std::istream& in, RunConfig& config);
void load_config_file(const std::string& path, RunConfig& config);

/// Environment override for the output directory.
inline constexpr const char* kOutputDirEnv = "LEVYSPDE_OUTPUT_DIR";

}  // namespace levyspde
