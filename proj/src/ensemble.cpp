#include "levyspde/ensemble.hpp"

#include <limits>
#include <ostream>

#include "levyspde/errors.hpp"

namespace levyspde {

EstimatorSummary summarize(std::string name, const RunningStats& stats,
                           std::optional<double> target) {
    EstimatorSummary s;
    s.name = std::move(name);
    s.n = stats.count();
    s.estimate = stats.mean();
    s.stderr_ = stats.stderr_of_mean();
    s.ci_low = s.estimate - 1.959963984540054 * s.stderr_;
    s.ci_high = s.estimate + 1.959963984540054 * s.stderr_;
    s.target = target;
    if (target) {
        const double diff = s.estimate - *target;
        if (s.stderr_ > 0.0) s.studentized = diff / s.stderr_;
        else s.studentized = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return s;
}

void write_summary_csv(std::ostream& out, std::span<const EstimatorSummary> rows) {
    const auto old = out.precision(17);
    out << "name,n,estimate,target,stderr,studentized\n";
    for (const auto& r : rows) {
        out << r.name << ',' << r.n << ',' << r.estimate << ',';
        if (r.target) out << *r.target;
        out << ',' << r.stderr_ << ',';
        if (r.studentized) out << *r.studentized;
        out << '\n';
    }
    out.precision(old);
}

namespace detail {

unsigned resolve_workers(unsigned requested, std::size_t jobs) {
    unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    if (jobs < w) w = static_cast<unsigned>(std::max<std::size_t>(1, jobs));
    return w;
}

}  // namespace detail

std::vector<EstimatorSummary> run_ensemble(
    const EnsembleOptions& opts, const std::vector<std::string>& names,
    const std::function<std::vector<double>(std::size_t, std::uint64_t)>& task,
    const std::vector<std::optional<double>>& targets) {
    if (opts.n < 1) throw ConfigError("run_ensemble: N must be >= 1");
    const std::size_t m = names.size();
    auto stats = reduce_ensemble(
        opts, std::vector<RunningStats>(m),
        [&](std::vector<RunningStats>& acc, std::size_t i, std::uint64_t seed) {
            const auto sample = task(i, seed);
            if (sample.size() != m) throw std::runtime_error("task returned the wrong number of metrics");
            for (std::size_t j = 0; j < m; ++j) acc[j].push(sample[j]);
        },
        [](std::vector<RunningStats>& into, const std::vector<RunningStats>& from) {
            for (std::size_t j = 0; j < into.size(); ++j) into[j].merge(from[j]);
        });
    std::vector<EstimatorSummary> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        out.push_back(summarize(names[j], stats[j], j < targets.size() ? targets[j] : std::nullopt));
    return out;
}

}  // namespace levyspde
