#include "levyspde/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "levyspde/config.hpp"
#include "levyspde/ensemble.hpp"
#include "levyspde/errors.hpp"
#include "levyspde/solver.hpp"
#include "levyspde/verify.hpp"

namespace levyspde {

std::string usage_text() {
    std::ostringstream os;
    os << "usage: levyspde <command> [--config FILE] [--KEY VALUE ...]\n"
          "\n"
          "commands:\n"
          "  sample              draw one point configuration (t,x,z)\n"
          "  solve               exact forward solve of one realization (m1 = 0)\n"
          "  picard              Picard iterates of one realization (--iters)\n"
          "  moments             ensemble estimates of E u and E u^2 on the lattice\n"
          "  verify CHECK        run a check; exit 0 pass, 2 fail\n"
          "\n"
          "checks:";
    for (const auto& c : check_names()) os << ' ' << c;
    os << "\n\n"
          "Every configuration key is also a flag, e.g. --n 10000 --seed 7 --kernel heat.\n"
          "Keys: kernel sigma sigma_a sigma_b initial initial_c T R nt nx noise intensity\n"
          "      jump atoms weights mean sd c alpha eps zmax n seed workers iters grid h2_eps out\n"
          "      tol_z tol_exact tol_derivative tol_cross tol_quadrature\n"
          "Output goes to stdout unless --out DIR or "
       << kOutputDirEnv << " is set (flag wins).\n";
    return os.str();
}

namespace {

using Tables = std::vector<std::pair<std::string, std::string>>;

void emit(const RunConfig& cfg, const Tables& tables, std::ostream& out) {
    if (cfg.out.empty()) {
        for (const auto& [stem, text] : tables) {
            if (tables.size() > 1) out << "# " << stem << '\n';
            out << text;
        }
        return;
    }
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    for (const auto& [stem, text] : tables) {
        std::ofstream f(dir / (stem + ".csv"));
        if (!f) throw ConfigError("cannot write `" + (dir / (stem + ".csv")).string() + "`");
        f << text;
    }
}

template <class Fn>
std::string csv(Fn&& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

int cmd_sample(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto noise = cfg.noise_spec();
    const auto config = sample_prm(noise, cfg.window(), cfg.seed);
    Tables t{{"configuration", csv([&](std::ostream& os) { write_configuration_csv(os, config); })}};
    if (!cfg.out.empty())
        t.emplace_back("configuration_meta",
                       csv([&](std::ostream& os) { write_configuration_metadata(os, config, noise); }));
    emit(cfg, t, out);
    err << "sampled " << config.size() << " atoms (" << noise.describe() << ")\n";
    return kExitPass;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto p = cfg.problem();
    if (p.noise.m1() != 0.0) {
        err << "solve: jump law has m1 != 0; use `picard` instead\n";
        return kExitUsage;
    }
    const auto config = sample_prm(p.noise, p.window, cfg.seed);
    const auto path = solve_forward(config, p, true);
    emit(cfg,
         {{"atoms", csv([&](std::ostream& os) { write_atoms_csv(os, config, path); })},
          {"grid", csv([&](std::ostream& os) { write_grid_csv(os, path); })}},
         out);
    err << "forward solve: " << config.size() << " atoms, mild residual " << mild_residual(config, p, path) << '\n';
    return kExitPass;
}

int cmd_picard(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto p = cfg.problem();
    const auto config = sample_prm(p.noise, p.window, cfg.seed);
    const auto r = picard_solve(config, p, cfg.iters, true);
    const std::string diffs = csv([&](std::ostream& os) {
        os.precision(17);
        os << "n,d_n\n";
        for (std::size_t n = 0; n < r.sup_differences.size(); ++n) os << n + 1 << ',' << r.sup_differences[n] << '\n';
    });
    emit(cfg,
         {{"atoms", csv([&](std::ostream& os) { write_atoms_csv(os, config, r.path); })},
          {"grid", csv([&](std::ostream& os) { write_grid_csv(os, r.path); })},
          {"picard_differences", diffs}},
         out);
    err << "picard: " << cfg.iters << " iterations on " << config.size() << " atoms, last sup difference "
        << (r.sup_differences.empty() ? 0.0 : r.sup_differences.back()) << '\n';
    return kExitPass;
}

int cmd_moments(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto p = cfg.problem();
    const bool exact = p.noise.m1() == 0.0;
    const std::size_t cells = p.n_t * p.n_x;
    struct Acc {
        std::vector<RunningStats> first, second;
    };
    const Acc init{std::vector<RunningStats>(cells), std::vector<RunningStats>(cells)};
    const std::size_t n = cfg.ensemble_size(100);
    const Acc acc = reduce_ensemble(
        EnsembleOptions{n, cfg.seed, cfg.workers}, init,
        [&](Acc& a, std::size_t, std::uint64_t seed) {
            const auto config = sample_prm(p.noise, p.window, seed);
            const auto path = exact ? solve_forward(config, p, true) : picard_solve(config, p, cfg.iters, true).path;
            const auto v = path.grid.values();
            for (std::size_t c = 0; c < cells; ++c) {
                a.first[c].push(v[c]);
                a.second[c].push(v[c] * v[c]);
            }
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t c = 0; c < into.first.size(); ++c) {
                into.first[c].merge(from.first[c]);
                into.second[c].merge(from.second[c]);
            }
        });
    const GridField lattice(p.window, p.n_t, p.n_x);
    const std::string table = csv([&](std::ostream& os) {
        os.precision(17);
        os << "t,x,n,mean,mean_stderr,second_moment,second_moment_stderr\n";
        for (std::size_t k = 0; k < p.n_t; ++k)
            for (std::size_t j = 0; j < p.n_x; ++j) {
                const std::size_t c = k * p.n_x + j;
                os << lattice.time(k) << ',' << lattice.space(j) << ',' << acc.first[c].count() << ','
                   << acc.first[c].mean() << ',' << acc.first[c].stderr_of_mean() << ',' << acc.second[c].mean()
                   << ',' << acc.second[c].stderr_of_mean() << '\n';
            }
    });
    emit(cfg, {{"moments", table}}, out);
    err << "moments: " << n << " realizations (" << (exact ? "forward" : "picard") << " solver)\n";
    return kExitPass;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        err << usage_text();
        return kExitUsage;
    }
    const std::string& command = args[0];
    if (command == "--help" || command == "-h" || command == "help") {
        out << usage_text();
        return kExitPass;
    }
    std::size_t i = 1;
    std::string check;
    if (command == "verify") {
        if (args.size() < 2 || args[1].rfind("--", 0) == 0) {
            err << "verify: missing check name\n" << usage_text();
            return kExitUsage;
        }
        check = args[1];
        i = 2;
        bool known = false;
        for (const auto& c : check_names()) known = known || c == check;
        if (!known) {
            err << "verify: unknown check `" << check << "`\n" << usage_text();
            return kExitUsage;
        }
    } else if (command != "sample" && command != "solve" && command != "picard" && command != "moments") {
        err << "unknown command `" << command << "`\n" << usage_text();
        return kExitUsage;
    }

    try {
        // Precedence: flag > environment > config file > built-in default.
        std::string config_file;
        std::vector<std::pair<std::string, std::string>> flags;
        for (; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument `" + a + "`");
            std::string key = a.substr(2), value;
            if (const auto eq = key.find('='); eq != std::string::npos) {
                value = key.substr(eq + 1);
                key = key.substr(0, eq);
            } else {
                if (i + 1 >= args.size()) throw ConfigError("flag `" + a + "` needs a value");
                value = args[++i];
            }
            if (key == "config") config_file = value;
            else flags.emplace_back(key, value);
        }
        RunConfig cfg;
        if (!config_file.empty()) load_config_file(config_file, cfg);
        if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.out = env;
        for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
        cfg.validate();

        if (command == "sample") return cmd_sample(cfg, out, err);
        if (command == "solve") return cmd_solve(cfg, out, err);
        if (command == "picard") return cmd_picard(cfg, out, err);
        if (command == "moments") return cmd_moments(cfg, out, err);

        const auto outcome = run_check(check, cfg);
        emit(cfg, outcome.tables, out);
        err << (outcome.pass ? "PASS " : "FAIL ") << check << ": " << outcome.summary << '\n';
        return outcome.pass ? kExitPass : kExitFail;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFail;
    }
}

}  // namespace levyspde
