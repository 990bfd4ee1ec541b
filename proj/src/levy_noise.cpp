#include "levyspde/levy_noise.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "levyspde/errors.hpp"
#include "levyspde/quadrature.hpp"

namespace levyspde {

namespace {

constexpr double kMomentTol = 1e-10;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

LevyMeasureSpec LevyMeasureSpec::rademacher(double intensity) {
    return two_point(intensity, 1.0);
}

LevyMeasureSpec LevyMeasureSpec::two_point(double intensity, double jump) {
    if (!finite_nonneg(intensity)) throw ConfigError("two-point: intensity must be finite and >= 0");
    if (!std::isfinite(jump) || jump == 0.0) throw ConfigError("two-point: jump must be finite and non-zero");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::TwoPoint;
    spec.atoms_ = {-std::abs(jump), std::abs(jump)};
    spec.weights_ = {0.5 * intensity, 0.5 * intensity};
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::discrete(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size()) throw ConfigError("discrete: atoms and weights differ in length");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!std::isfinite(atoms[i]) || atoms[i] == 0.0)
            throw ConfigError("discrete: atoms must be finite and non-zero");
        if (!finite_nonneg(weights[i])) throw ConfigError("discrete: weights must be finite and >= 0");
    }
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::Discrete;
    spec.atoms_ = std::move(atoms);
    spec.weights_ = std::move(weights);
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::gaussian_jump(double intensity, double mean, double sd) {
    if (!finite_nonneg(intensity)) throw ConfigError("gaussian-jump: intensity must be finite and >= 0");
    if (!std::isfinite(mean) || !std::isfinite(sd) || sd <= 0.0)
        throw ConfigError("gaussian-jump: need finite mean and sd > 0");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::GaussianJump;
    spec.p0_ = intensity;
    spec.p1_ = mean;
    spec.p2_ = sd;
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::truncated_power_law(double c, double alpha, double eps, double z_max) {
    if (!finite_nonneg(c)) throw ConfigError("power-law: c must be finite and >= 0");
    if (!std::isfinite(alpha) || alpha <= 0.0) throw ConfigError("power-law: alpha must be > 0");
    if (!std::isfinite(eps) || eps <= 0.0)
        throw ConfigError("power-law: small-jump cutoff eps must be > 0 (finite activity)");
    if (!std::isfinite(z_max) || z_max <= eps)
        throw ConfigError("power-law: z_max must be finite and > eps (finite second moment)");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::TruncatedPowerLaw;
    spec.p0_ = c;
    spec.p1_ = alpha;
    spec.p2_ = eps;
    spec.p3_ = z_max;
    spec.finalize();
    return spec;
}

double LevyMeasureSpec::density(double z) const {
    switch (kind_) {
    case MeasureKind::GaussianJump: {
        const double u = (z - p1_) / p2_;
        return p0_ * std::exp(-0.5 * u * u) / (p2_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case MeasureKind::TruncatedPowerLaw: {
        const double a = std::abs(z);
        if (a < p2_ || a > p3_) return 0.0;
        return p0_ * std::pow(a, -1.0 - p1_);
    }
    default:
        return 0.0;
    }
}

void LevyMeasureSpec::finalize() {
    if (is_atomic()) {
        Moments m;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            m.mass += weights_[i];
            m.m1 += weights_[i] * atoms_[i];
            m.v += weights_[i] * atoms_[i] * atoms_[i];
        }
        moments_ = m;
        cumulative_.resize(weights_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) cumulative_[i] = (acc += weights_[i]);
    } else {
        const double inf = std::numeric_limits<double>::infinity();
        auto f0 = [this](double z) { return density(z); };
        auto f1 = [this](double z) { return z * density(z); };
        auto f2 = [this](double z) { return z * z * density(z); };
        Moments m;
        if (kind_ == MeasureKind::GaussianJump) {
            // Split at the mode so the rule sees the bulk on both halves.
            const double b[] = {p1_};
            m.mass = quad::integrate(f0, -inf, inf, b, kMomentTol);
            m.m1 = quad::integrate(f1, -inf, inf, b, kMomentTol);
            m.v = quad::integrate(f2, -inf, inf, b, kMomentTol);
        } else {
            const double eps = p2_, zmax = p3_;
            m.mass = 2.0 * quad::integrate(f0, eps, zmax, kMomentTol);
            m.m1 = 0.0;  // symmetric support, odd integrand
            m.v = 2.0 * quad::integrate(f2, eps, zmax, kMomentTol);
        }
        moments_ = m;
    }
    if (!std::isfinite(moments_.mass) || !std::isfinite(moments_.v) || !std::isfinite(moments_.m1))
        throw ConfigError("Levy measure: non-integrable parameterization");
}

double LevyMeasureSpec::sample_jump(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (kind_) {
    case MeasureKind::TwoPoint:
    case MeasureKind::Discrete: {
        const double u = unif(rng) * moments_.mass;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
        if (i >= atoms_.size()) i = atoms_.size() - 1;
        return atoms_[i];
    }
    case MeasureKind::GaussianJump: {
        std::normal_distribution<double> normal(p1_, p2_);
        double z = 0.0;
        while (z == 0.0) z = normal(rng);
        return z;
    }
    case MeasureKind::TruncatedPowerLaw: {
        // Inverse CDF of |z| ∝ a^{-1-α} on [eps, z_max], then a fair sign.
        const double alpha = p1_;
        const double lo = std::pow(p2_, -alpha);
        const double hi = std::pow(p3_, -alpha);
        const double u = unif(rng);
        const double a = std::pow(lo - u * (lo - hi), -1.0 / alpha);
        return unif(rng) < 0.5 ? -a : a;
    }
    }
    return 0.0;
}

LevyMeasureSpec LevyMeasureSpec::scaled_jumps(double factor) const {
    if (!std::isfinite(factor) || factor == 0.0) throw ConfigError("scaled_jumps: factor must be non-zero");
    switch (kind_) {
    case MeasureKind::TwoPoint:
    case MeasureKind::Discrete: {
        std::vector<double> a(atoms_);
        for (double& z : a) z *= factor;
        LevyMeasureSpec s = discrete(std::move(a), weights_);
        s.kind_ = kind_;
        return s;
    }
    case MeasureKind::GaussianJump:
        return gaussian_jump(p0_, p1_ * factor, p2_ * std::abs(factor));
    case MeasureKind::TruncatedPowerLaw: {
        // Image density c f^α |z|^{-1-α} on [f eps, f z_max].
        const double f = std::abs(factor);
        return truncated_power_law(p0_ * std::pow(f, p1_), p1_, p2_ * f, p3_ * f);
    }
    }
    return *this;
}

std::string LevyMeasureSpec::describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    switch (kind_) {
    case MeasureKind::TwoPoint:
        os << "two-point(intensity=" << moments_.mass << ",jump=" << atoms_[1] << ")";
        break;
    case MeasureKind::Discrete:
        os << "discrete(";
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            os << (i ? ";" : "") << atoms_[i] << ":" << weights_[i];
        os << ")";
        break;
    case MeasureKind::GaussianJump:
        os << "gaussian-jump(intensity=" << p0_ << ",mean=" << p1_ << ",sd=" << p2_ << ")";
        break;
    case MeasureKind::TruncatedPowerLaw:
        os << "power-law(c=" << p0_ << ",alpha=" << p1_ << ",eps=" << p2_ << ",zmax=" << p3_ << ")";
        break;
    }
    return os.str();
}

SpaceTimeWindow::SpaceTimeWindow(double T, double R) : T_(T), R_(R) {
    if (!std::isfinite(T) || T <= 0.0) throw ConfigError("window: T must be finite and > 0");
    if (!std::isfinite(R) || R <= 0.0) throw ConfigError("window: R must be finite and > 0");
}

PointConfiguration::PointConfiguration(SpaceTimeWindow window, std::vector<Atom> atoms,
                                       std::uint64_t seed)
    : window_(window), atoms_(std::move(atoms)), seed_(seed) {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        if (!window_.contains(a.t, a.x))
            throw ConfigError("configuration: atom outside the window");
        if (!std::isfinite(a.z) || a.z == 0.0) throw ConfigError("configuration: zero or non-finite jump");
        if (i > 0 && !(atoms_[i - 1].t < a.t))
            throw ConfigError("configuration: atom times must be strictly increasing");
    }
}

std::size_t PointConfiguration::count_before(double t) const noexcept {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                               [](const Atom& a, double s) { return a.t < s; });
    return static_cast<std::size_t>(it - atoms_.begin());
}

bool PointConfiguration::has_time(double t) const noexcept {
    const std::size_t i = count_before(t);
    return i < atoms_.size() && atoms_[i].t == t;
}

PointConfiguration sample_prm(const LevyMeasureSpec& spec, const SpaceTimeWindow& window,
                              std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Atom> atoms;
    const double mean = spec.total_mass() * window.volume();
    if (mean > 0.0) {
        std::poisson_distribution<long long> count_dist(mean);
        const long long n = count_dist(rng);
        std::uniform_real_distribution<double> time(0.0, window.T());
        std::uniform_real_distribution<double> space(-window.R(), window.R());
        auto draw_time = [&] {
            double t = 0.0;
            while (t <= 0.0) t = time(rng);
            return t;
        };
        atoms.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            const double t = draw_time();
            const double x = space(rng);
            const double z = spec.sample_jump(rng);
            atoms.push_back({t, x, z});
        }
        auto by_time = [](const Atom& a, const Atom& b) { return a.t < b.t; };
        std::sort(atoms.begin(), atoms.end(), by_time);
        // Probability-zero collisions; re-draw the later time and re-sort.
        for (bool collided = true; collided;) {
            collided = false;
            for (std::size_t i = 1; i < atoms.size(); ++i) {
                if (atoms[i].t == atoms[i - 1].t) {
                    atoms[i].t = draw_time();
                    collided = true;
                }
            }
            if (collided) std::sort(atoms.begin(), atoms.end(), by_time);
        }
    }
    return PointConfiguration(window, std::move(atoms), seed);
}

PointConfiguration add_atom(const PointConfiguration& config, const Atom& point) {
    if (!config.window().contains(point.t, point.x))
        throw ConfigError("add_atom: point outside the window");
    if (!std::isfinite(point.z) || point.z == 0.0) throw ConfigError("add_atom: zero jump");
    if (config.has_time(point.t)) throw ConfigError("add_atom: time collides with an existing atom");
    std::vector<Atom> atoms(config.atoms().begin(), config.atoms().end());
    const std::size_t i = config.count_before(point.t);
    atoms.insert(atoms.begin() + static_cast<std::ptrdiff_t>(i), point);
    return PointConfiguration(config.window(), std::move(atoms), config.seed());
}

PointConfiguration remove_atom(const PointConfiguration& config, std::size_t index) {
    if (index >= config.size()) throw ConfigError("remove_atom: index out of range");
    std::vector<Atom> atoms(config.atoms().begin(), config.atoms().end());
    atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(index));
    return PointConfiguration(config.window(), std::move(atoms), config.seed());
}

void write_configuration_csv(std::ostream& out, const PointConfiguration& config) {
    const auto old = out.precision(17);
    out << "t,x,z\n";
    for (const Atom& a : config.atoms()) out << a.t << ',' << a.x << ',' << a.z << '\n';
    out.precision(old);
}

PointConfiguration read_configuration_csv(std::istream& in, const SpaceTimeWindow& window,
                                          std::uint64_t seed) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,x,z", 0) != 0)
        throw ConfigError("configuration CSV: missing `t,x,z` header");
    std::vector<Atom> atoms;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        Atom a{};
        char c1 = 0, c2 = 0;
        if (!(row >> a.t >> c1 >> a.x >> c2 >> a.z) || c1 != ',' || c2 != ',')
            throw ConfigError("configuration CSV: malformed row `" + line + "`");
        atoms.push_back(a);
    }
    return PointConfiguration(window, std::move(atoms), seed);
}

void write_configuration_metadata(std::ostream& out, const PointConfiguration& config,
                                  const LevyMeasureSpec& spec) {
    const auto old = out.precision(17);
    out << "T=" << config.window().T() << '\n'
        << "R=" << config.window().R() << '\n'
        << "seed=" << config.seed() << '\n'
        << "atoms=" << config.size() << '\n'
        << "measure=" << spec.describe() << '\n'
        << "v=" << spec.v() << '\n'
        << "m1=" << spec.m1() << '\n'
        << "mass=" << spec.total_mass() << '\n';
    out.precision(old);
}

}  // namespace levyspde
