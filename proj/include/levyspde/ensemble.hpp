#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "levyspde/rng.hpp"

namespace levyspde {

/// Streaming mean/variance (Welford), with the pairwise merge of Chan et al.
class RunningStats {
public:
    void push(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const RunningStats& o) noexcept {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        const double n = static_cast<double>(n_ + o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * static_cast<double>(o.n_) / n;
        m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
        n_ += o.n_;
    }
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_of_mean() const noexcept {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// A Monte Carlo estimate; `studentized` = (estimate − target)/stderr.
struct EstimatorSummary {
    std::string name;
    std::size_t n = 0;
    double estimate = 0.0;
    std::optional<double> target;
    double stderr_ = 0.0;
    std::optional<double> studentized;
    std::optional<bool> pass;
    double ci_low = 0.0;   ///< 95% normal-approximation interval
    double ci_high = 0.0;

    /// |studentized| ≤ z_max (an exact match with zero stderr passes).
    bool within(double z_max) const {
        return studentized.has_value() && std::abs(*studentized) <= z_max;
    }
};

EstimatorSummary summarize(std::string name, const RunningStats& stats,
                           std::optional<double> target = std::nullopt);

/// CSV `name,n,estimate,target,stderr,studentized`.
void write_summary_csv(std::ostream& out, std::span<const EstimatorSummary> rows);

struct EnsembleOptions {
    std::size_t n = 1;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;  ///< 0 = hardware concurrency
};

/// Thrown when one realization fails; carries its index and derived seed.
class EnsembleError : public std::runtime_error {
public:
    EnsembleError(std::size_t index, std::uint64_t seed, const std::string& what)
        : std::runtime_error("realization " + std::to_string(index) + " (seed " +
                             std::to_string(seed) + ") failed: " + what),
          index_(index), seed_(seed) {}
    std::size_t index() const noexcept { return index_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t index_;
    std::uint64_t seed_;
};

namespace detail {
unsigned resolve_workers(unsigned requested, std::size_t jobs);
}

/// Order-independent parallel reduction over N realizations.
///
/// Realization i runs `task(acc, i, derive_seed(master, i))`. Indices are
/// grouped into fixed blocks of `kBlock`; each block folds into a fresh copy
/// of `init` in index order, and blocks merge in block order. The result is
/// therefore bit-identical for every worker count.
template <class Acc, class Task, class Merge>
Acc reduce_ensemble(const EnsembleOptions& opts, const Acc& init, Task&& task, Merge&& merge) {
    constexpr std::size_t kBlock = 32;
    const std::size_t n_blocks = (opts.n + kBlock - 1) / kBlock;
    std::vector<std::optional<Acc>> partial(n_blocks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> aborted{false};

    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks || aborted.load()) return;
            Acc acc = init;
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(opts.n, lo + kBlock);
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint64_t seed = derive_seed(opts.master_seed, i);
                try {
                    task(acc, i, seed);
                } catch (const std::exception& e) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::make_exception_ptr(EnsembleError(i, seed, e.what()));
                    aborted = true;
                    return;
                }
            }
            partial[b].emplace(std::move(acc));
        }
    };

    const unsigned n_workers = detail::resolve_workers(opts.workers, n_blocks);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc out = init;
    for (auto& p : partial) merge(out, *p);
    return out;
}

/// Runs N realizations whose task returns one sample per named metric and
/// merges them into one summary per metric. `targets` may be shorter than
/// `names`; missing entries have no target.
std::vector<EstimatorSummary> run_ensemble(
    const EnsembleOptions& opts, const std::vector<std::string>& names,
    const std::function<std::vector<double>(std::size_t index, std::uint64_t seed)>& task,
    const std::vector<std::optional<double>>& targets = {});

}  // namespace levyspde
