#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace levyspde {

/// A non-negative kernel g sampled on n_points equispaced nodes of [0, T].
class ConvolutionKernel {
public:
    ConvolutionKernel(const std::function<double(double)>& g, double T, std::size_t n_points = 4096);

    double T() const noexcept { return T_; }
    std::size_t size() const noexcept { return g_.size(); }
    double step() const noexcept { return h_; }
    double time(std::size_t k) const noexcept { return h_ * static_cast<double>(k); }
    std::span<const double> samples() const noexcept { return g_; }
    /// G(T) = ∫₀ᵀ g by the trapezoid rule.
    double total() const noexcept { return total_; }

    /// (f ∗ g)(t_k) = ∫₀^{t_k} f(s)g(t_k − s)ds by the trapezoid rule, f on the same nodes.
    std::vector<double> convolve(std::span<const double> f) const;
    ConvolutionKernel scaled(double c) const;

private:
    ConvolutionKernel() = default;
    double T_ = 0.0, h_ = 0.0, total_ = 0.0;
    std::vector<double> g_;
};

/// Trapezoid convolution of two sampled functions on a common step.
std::vector<double> trapezoid_convolution(std::span<const double> f, std::span<const double> g, double h);
/// Trapezoid integral of samples with step h.
double trapezoid(std::span<const double> f, double h);

struct RenewalSequence {
    std::vector<double> a;         ///< a_n = G(T)ⁿ P(S_n ≤ T), a_0 = 1
    std::vector<double> p_le_T;    ///< P(S_n ≤ T), index 0 = 1
};

/// Density of S_n by repeated convolution of g/G(T); n = 0..n_max.
RenewalSequence renewal_probabilities(const ConvolutionKernel& kernel, std::size_t n_max);

struct BoundRow {
    std::size_t n;
    double t;       ///< node of smallest margin
    double f;
    double bound;
    double margin;  ///< bound − f (negative = violated)
};

struct GronwallReport {
    bool hypothesis_ok = false;
    /// first (n+1, t) where f_{n+1} > C_n + f_n ∗ g + slack
    std::optional<std::pair<std::size_t, double>> first_failure;
    /// f_n ≤ C_n + Σ_{j=1}^{n−1} C_j a_{n−j} + C_0 a_n M, n ≥ 1
    std::vector<BoundRow> stated;
    bool stated_ok = false;
    /// f_n ≤ Σ_{j=0}^{n−1} C_j a_{n−1−j} + M a_n, the recursion unrolled as written
    std::vector<BoundRow> unrolled;
    bool unrolled_ok = false;
    double worst_margin_stated = 0.0;
    double worst_margin_unrolled = 0.0;
};

/// f[n] sampled on the kernel nodes, n = 0..len−1; C has at least len entries.
/// M = sup f_0 unless given. `slack` is the relative quadrature slack.
GronwallReport verify_bound(const std::vector<std::vector<double>>& f, std::span<const double> C,
                            const ConvolutionKernel& kernel, std::optional<double> M = std::nullopt,
                            double slack = 1e-6);

/// f_{n+1} = C_{n+1} + f_n ∗ g with f_0 ≡ M: satisfies the bound's hypothesis
/// whenever C is non-increasing, and meets the stated bound with equality at T.
std::vector<std::vector<double>> equality_sequence(std::span<const double> C, const ConvolutionKernel& kernel,
                                                   double M);

struct SummabilityReport {
    double p = 2.0;
    std::vector<double> partial_sums;  ///< Σ_{k≤n} a_k^{1/p}
    std::vector<double> ratios;        ///< (a_{n+1}/a_n)^{1/p} while a_n > 0
    bool strictly_decreasing = false;  ///< over all computed ratios
    bool pass = false;                 ///< last ratio < 1 and strictly decreasing over the tail half
};

SummabilityReport summability_check(std::span<const double> a, double p);

/// CSV `n,a_n,partial_sum_p`.
void write_renewal_csv(std::ostream& out, const RenewalSequence& seq, const SummabilityReport& sum);
/// CSV `n,t,f_n,bound,margin` (stated form).
void write_bound_csv(std::ostream& out, const GronwallReport& report);

}  // namespace levyspde
