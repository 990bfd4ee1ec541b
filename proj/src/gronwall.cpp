#include "levyspde/gronwall.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "levyspde/errors.hpp"

namespace levyspde {

ConvolutionKernel::ConvolutionKernel(const std::function<double(double)>& g, double T, std::size_t n_points)
    : T_(T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("convolution kernel: T must be positive");
    if (n_points < 3) throw ConfigError("convolution kernel: need at least 3 nodes");
    h_ = T / static_cast<double>(n_points - 1);
    g_.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double v = g(time(k));
        if (!std::isfinite(v)) throw DomainError("convolution kernel: g is not finite at t = " + std::to_string(time(k)));
        if (v < 0.0) throw DomainError("convolution kernel: g is negative at t = " + std::to_string(time(k)));
        g_[k] = v;
    }
    total_ = trapezoid(g_, h_);
    if (!(total_ > 0.0)) throw DomainError("convolution kernel: G(T) = 0 (degenerate kernel)");
}

ConvolutionKernel ConvolutionKernel::scaled(double c) const {
    if (!(c > 0.0)) throw ConfigError("convolution kernel: scale must be positive");
    ConvolutionKernel k;
    k.T_ = T_;
    k.h_ = h_;
    k.g_ = g_;
    for (double& v : k.g_) v *= c;
    k.total_ = trapezoid(k.g_, h_);
    return k;
}

double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
    return s * h;
}

std::vector<double> trapezoid_convolution(std::span<const double> f, std::span<const double> g, double h) {
    const std::size_t n = std::min(f.size(), g.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.5 * (f[0] * g[k] + f[k] * g[0]);
        for (std::size_t m = 1; m < k; ++m) s += f[m] * g[k - m];
        out[k] = s * h;
    }
    return out;
}

std::vector<double> ConvolutionKernel::convolve(std::span<const double> f) const {
    if (f.size() != g_.size()) throw ConfigError("convolve: sample count differs from the kernel grid");
    return trapezoid_convolution(f, g_, h_);
}

RenewalSequence renewal_probabilities(const ConvolutionKernel& kernel, std::size_t n_max) {
    if (n_max < 1) throw ConfigError("renewal_probabilities: n_max must be >= 1");
    const double G = kernel.total();
    std::vector<double> p1(kernel.samples().begin(), kernel.samples().end());
    for (double& v : p1) v /= G;

    RenewalSequence seq;
    seq.a.push_back(1.0);
    seq.p_le_T.push_back(1.0);
    std::vector<double> pn = p1;
    double Gn = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (n > 1) pn = trapezoid_convolution(pn, p1, kernel.step());
        Gn *= G;
        const double P = std::clamp(trapezoid(pn, kernel.step()), 0.0, 1.0);
        seq.p_le_T.push_back(P);
        seq.a.push_back(Gn * P);
    }
    return seq;
}

std::vector<std::vector<double>> equality_sequence(std::span<const double> C, const ConvolutionKernel& kernel,
                                                   double M) {
    if (C.empty()) throw ConfigError("equality_sequence: empty C");
    std::vector<std::vector<double>> f;
    f.emplace_back(kernel.size(), M);
    for (std::size_t n = 0; n + 1 < C.size(); ++n) {
        auto next = kernel.convolve(f.back());
        for (double& v : next) v += C[n + 1];
        f.push_back(std::move(next));
    }
    return f;
}

GronwallReport verify_bound(const std::vector<std::vector<double>>& f, std::span<const double> C,
                            const ConvolutionKernel& kernel, std::optional<double> M, double slack) {
    if (f.empty()) throw ConfigError("verify_bound: empty sequence");
    if (C.size() < f.size()) throw ConfigError("verify_bound: need one C_n per f_n");
    for (const auto& fn : f)
        if (fn.size() != kernel.size()) throw ConfigError("verify_bound: f_n not sampled on the kernel grid");
    const double sup0 = *std::max_element(f[0].begin(), f[0].end());
    const double m = M.value_or(sup0);
    const std::size_t L = f.size();

    GronwallReport rep;
    rep.hypothesis_ok = true;
    for (std::size_t n = 0; n + 1 < L && rep.hypothesis_ok; ++n) {
        const auto conv = kernel.convolve(f[n]);
        for (std::size_t k = 0; k < kernel.size(); ++k) {
            const double rhs = C[n] + conv[k];
            if (f[n + 1][k] > rhs + slack * (1.0 + std::abs(rhs))) {
                rep.hypothesis_ok = false;
                rep.first_failure = std::make_pair(n + 1, kernel.time(k));
                break;
            }
        }
    }

    const auto seq = renewal_probabilities(kernel, std::max<std::size_t>(L, 1));
    const auto& a = seq.a;
    auto row_for = [&](std::size_t n, double bound) {
        BoundRow row{n, 0.0, 0.0, bound, std::numeric_limits<double>::infinity()};
        for (std::size_t k = 0; k < kernel.size(); ++k) {
            const double margin = bound - f[n][k];
            if (margin < row.margin) row = {n, kernel.time(k), f[n][k], bound, margin};
        }
        return row;
    };

    rep.stated_ok = rep.unrolled_ok = true;
    rep.worst_margin_stated = rep.worst_margin_unrolled = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < L; ++n) {
        double stated = C[n] + C[0] * a[n] * m;
        for (std::size_t j = 1; j < n; ++j) stated += C[j] * a[n - j];
        double unrolled = m * a[n];
        for (std::size_t j = 0; j < n; ++j) unrolled += C[j] * a[n - 1 - j];

        const auto rs = row_for(n, stated);
        const auto ru = row_for(n, unrolled);
        rep.stated.push_back(rs);
        rep.unrolled.push_back(ru);
        rep.stated_ok = rep.stated_ok && rs.margin >= -slack * (1.0 + std::abs(stated));
        rep.unrolled_ok = rep.unrolled_ok && ru.margin >= -slack * (1.0 + std::abs(unrolled));
        rep.worst_margin_stated = std::min(rep.worst_margin_stated, rs.margin);
        rep.worst_margin_unrolled = std::min(rep.worst_margin_unrolled, ru.margin);
    }
    if (L == 1) rep.worst_margin_stated = rep.worst_margin_unrolled = 0.0;
    return rep;
}

SummabilityReport summability_check(std::span<const double> a, double p) {
    if (!(p > 1.0)) throw ConfigError("summability_check: p must exceed 1");
    SummabilityReport rep;
    rep.p = p;
    double s = 0.0;
    for (double an : a) {
        if (an < 0.0) throw ConfigError("summability_check: negative a_n");
        s += std::pow(an, 1.0 / p);
        rep.partial_sums.push_back(s);
    }
    for (std::size_t n = 0; n + 1 < a.size() && a[n] > 0.0; ++n)
        rep.ratios.push_back(std::pow(a[n + 1] / a[n], 1.0 / p));
    if (rep.ratios.empty()) {
        // All mass gone after the first term: trivially summable.
        rep.strictly_decreasing = rep.pass = a.size() > 1;
        return rep;
    }
    rep.strictly_decreasing = true;
    for (std::size_t n = 1; n < rep.ratios.size(); ++n)
        if (!(rep.ratios[n] < rep.ratios[n - 1])) rep.strictly_decreasing = false;
    bool tail = true;
    for (std::size_t n = rep.ratios.size() / 2 + 1; n < rep.ratios.size(); ++n)
        if (!(rep.ratios[n] < rep.ratios[n - 1])) tail = false;
    rep.pass = tail && rep.ratios.back() < 1.0 && rep.ratios.size() >= 2;
    return rep;
}

void write_renewal_csv(std::ostream& out, const RenewalSequence& seq, const SummabilityReport& sum) {
    const auto old = out.precision(17);
    out << "n,a_n,partial_sum_p\n";
    for (std::size_t n = 0; n < seq.a.size(); ++n) {
        out << n << ',' << seq.a[n] << ',';
        if (n < sum.partial_sums.size()) out << sum.partial_sums[n];
        out << '\n';
    }
    out.precision(old);
}

void write_bound_csv(std::ostream& out, const GronwallReport& report) {
    const auto old = out.precision(17);
    out << "n,t,f_n,bound,margin\n";
    for (const auto& r : report.stated)
        out << r.n << ',' << r.t << ',' << r.f << ',' << r.bound << ',' << r.margin << '\n';
    out.precision(old);
}

}  // namespace levyspde
