#include "levyspde/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "levyspde/errors.hpp"

namespace levyspde {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: `" + key + "` expects a number, got `" + v + "`");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: `" + key + "` expects a non-negative integer, got `" + v + "`");
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"kernel", [](RunConfig& c, auto&, auto& v) { c.kernel = v; }},
        {"sigma", [](RunConfig& c, auto&, auto& v) { c.sigma = v; }},
        {"sigma_a", [](RunConfig& c, auto& k, auto& v) { c.sigma_a = to_double(k, v); }},
        {"sigma_b", [](RunConfig& c, auto& k, auto& v) { c.sigma_b = to_double(k, v); }},
        {"initial", [](RunConfig& c, auto&, auto& v) { c.initial = v; }},
        {"initial_c", [](RunConfig& c, auto& k, auto& v) { c.initial_c = to_double(k, v); }},
        {"T", [](RunConfig& c, auto& k, auto& v) { c.T = to_double(k, v); }},
        {"R", [](RunConfig& c, auto& k, auto& v) { c.R = to_double(k, v); }},
        {"nt", [](RunConfig& c, auto& k, auto& v) { c.nt = to_uint(k, v); }},
        {"nx", [](RunConfig& c, auto& k, auto& v) { c.nx = to_uint(k, v); }},
        {"noise", [](RunConfig& c, auto&, auto& v) { c.noise = v; }},
        {"intensity", [](RunConfig& c, auto& k, auto& v) { c.intensity = to_double(k, v); }},
        {"jump", [](RunConfig& c, auto& k, auto& v) { c.jump = to_double(k, v); }},
        {"atoms", [](RunConfig& c, auto& k, auto& v) { c.atoms = to_list(k, v); }},
        {"weights", [](RunConfig& c, auto& k, auto& v) { c.weights = to_list(k, v); }},
        {"mean", [](RunConfig& c, auto& k, auto& v) { c.mean = to_double(k, v); }},
        {"sd", [](RunConfig& c, auto& k, auto& v) { c.sd = to_double(k, v); }},
        {"c", [](RunConfig& c, auto& k, auto& v) { c.c = to_double(k, v); }},
        {"alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = to_double(k, v); }},
        {"eps", [](RunConfig& c, auto& k, auto& v) { c.eps = to_double(k, v); }},
        {"zmax", [](RunConfig& c, auto& k, auto& v) { c.zmax = to_double(k, v); }},
        {"n", [](RunConfig& c, auto& k, auto& v) { c.n = to_uint(k, v); }},
        {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
        {"workers", [](RunConfig& c, auto& k, auto& v) { c.workers = static_cast<unsigned>(to_uint(k, v)); }},
        {"iters", [](RunConfig& c, auto& k, auto& v) { c.iters = to_uint(k, v); }},
        {"grid", [](RunConfig& c, auto& k, auto& v) { c.grid = to_uint(k, v); }},
        {"h2_eps", [](RunConfig& c, auto& k, auto& v) { c.h2_eps = to_double(k, v); }},
        {"out", [](RunConfig& c, auto&, auto& v) { c.out = v; }},
        {"tol_z", [](RunConfig& c, auto& k, auto& v) { c.tol.z_max = to_double(k, v); }},
        {"tol_exact", [](RunConfig& c, auto& k, auto& v) { c.tol.exact = to_double(k, v); }},
        {"tol_derivative", [](RunConfig& c, auto& k, auto& v) { c.tol.derivative = to_double(k, v); }},
        {"tol_cross", [](RunConfig& c, auto& k, auto& v) { c.tol.cross = to_double(k, v); }},
        {"tol_quadrature", [](RunConfig& c, auto& k, auto& v) { c.tol.quadrature = to_double(k, v); }},
    };
    return table;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config: unknown key `" + key + "`");
    it->second(config, key, value);
}

void read_config(std::istream& in, RunConfig& config) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected `key = value`");
        apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
}

void load_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open `" + path + "`");
    read_config(in, config);
}

SpaceTimeWindow RunConfig::window() const { return SpaceTimeWindow(T, R); }

LevyMeasureSpec RunConfig::noise_spec() const {
    if (noise == "rademacher") return LevyMeasureSpec::rademacher(intensity);
    if (noise == "two-point") return LevyMeasureSpec::two_point(intensity, jump);
    if (noise == "discrete") return LevyMeasureSpec::discrete(atoms, weights);
    if (noise == "gaussian") return LevyMeasureSpec::gaussian_jump(intensity, mean, sd);
    if (noise == "power-law") return LevyMeasureSpec::truncated_power_law(c, alpha, eps, zmax);
    throw ConfigError("config: unknown noise `" + noise +
                      "` (expected rademacher|two-point|discrete|gaussian|power-law)");
}

ProblemSpec RunConfig::problem() const {
    return ProblemSpec{KernelModel::parse(kernel),    SigmaMap::parse(sigma, sigma_a, sigma_b),
                       InitialData::parse(initial, initial_c), window(), noise_spec(), nt, nx};
}

void RunConfig::validate() const {
    if (nt < 2 || nx < 2) throw ConfigError("config: nt and nx must be >= 2");
    if (grid < 3) throw ConfigError("config: grid must be >= 3");
    for (double t : {tol.z_max, tol.exact, tol.derivative, tol.cross, tol.quadrature})
        if (!(t > 0.0)) throw ConfigError("config: tolerances must be positive");
    if (!(h2_eps > 0.0)) throw ConfigError("config: h2_eps must be positive");
    const auto p = problem();
    deterministic_part(p, 0.5 * T, 0.0);  // rejects kernel / initial mismatches
}

}  // namespace levyspde
