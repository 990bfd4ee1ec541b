#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "levyspde/cli.hpp"
#include "levyspde/config.hpp"
#include "levyspde/ensemble.hpp"
#include "levyspde/errors.hpp"
#include "levyspde/pathwise_integrals.hpp"

using namespace levyspde;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = cli_dispatch(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("levyspde_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("running statistics match a two-pass computation, and merge") {
    Rng rng(12);
    std::normal_distribution<double> nd(3.0, 2.0);
    std::vector<double> xs(1001);
    for (double& x : xs) x = nd(rng);
    RunningStats all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.push(xs[i]);
        (i < 400 ? left : right).push(xs[i]);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    CHECK(all.mean() == doctest::Approx(mean).epsilon(1e-13));
    CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(mean).epsilon(1e-13));
    CHECK(left.variance() == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("ensemble runner") {
    const SpaceTimeWindow w(1.0, 2.0);
    const auto spec = LevyMeasureSpec::rademacher(5.0);
    const auto h = Integrand::indicator(w, {0, 1, -1, 1});
    auto task = [&](std::size_t, std::uint64_t seed) {
        const double L = ito_integral(sample_prm(spec, w, seed), h, spec);
        return std::vector<double>{L, L * L};
    };

    SUBCASE("N = 1 equals a direct call with the derived seed") {
        const auto r = run_ensemble({1, 99, 1}, {"L", "L2"}, task);
        CHECK(r[0].estimate == task(0, derive_seed(99, 0))[0]);
        CHECK(r[0].n == 1);
    }
    SUBCASE("worker count leaves the CSV byte-identical") {
        auto csv = [&](unsigned workers) {
            const auto r = run_ensemble({2000, 5, workers}, {"L", "L2"}, task, {0.0, 10.0});
            std::ostringstream os;
            write_summary_csv(os, r);
            return os.str();
        };
        const auto one = csv(1);
        CHECK(one.rfind("name,n,estimate,target,stderr,studentized\n", 0) == 0);
        CHECK(csv(4) == one);
        CHECK(csv(0) == one);
    }
    SUBCASE("a failing realization names its seed") {
        try {
            run_ensemble({100, 3, 2}, {"x"}, [](std::size_t i, std::uint64_t) -> std::vector<double> {
                if (i == 57) throw DomainError("boom");
                return {1.0};
            });
            FAIL("expected EnsembleError");
        } catch (const EnsembleError& e) {
            CHECK(e.index() == 57);
            CHECK(e.seed() == derive_seed(3, 57));
            CHECK(std::string(e.what()).find("boom") != std::string::npos);
        }
    }
}

TEST_CASE("config file parsing") {
    RunConfig c;
    std::istringstream in("# comment\nkernel = heat\n\nsigma=sin\nn = 250\natoms = 1, -2.5\nweights=0.5,0.5\n"
                          "noise = discrete\ntol_exact = 1e-11\n");
    read_config(in, c);
    CHECK(c.kernel == "heat");
    CHECK(c.sigma == "sin");
    CHECK(c.n == 250);
    CHECK(c.atoms == std::vector<double>{1.0, -2.5});
    CHECK(c.tol.exact == 1e-11);
    CHECK(c.noise_spec().v() == doctest::Approx(0.5 + 0.5 * 6.25));
    CHECK(c.ensemble_size(10) == 250);
    std::istringstream bad("kernal = heat\n");
    CHECK_THROWS_AS(read_config(bad, c), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "n", "many"), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/levyspde.cfg", c), ConfigError);
}

TEST_CASE("command line") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"verify", "no-such-check"}).code == kExitUsage);
    CHECK(run({"verify", "isometry", "--n"}).code == kExitUsage);

    const auto iso = run({"verify", "isometry", "--n", "10000", "--seed", "7"});
    CHECK(iso.code == kExitPass);
    CHECK(iso.out.rfind("name,n,estimate,target,stderr,studentized\n", 0) == 0);
    CHECK(iso.err.rfind("PASS isometry", 0) == 0);

    const auto d = run({"verify", "derivative-eq", "--sigma", "abs"});
    CHECK(d.code == kExitUsage);
    CHECK(d.err.find("nonlinear-probe") != std::string::npos);

    const auto s = run({"sample", "--seed=3", "--intensity", "2"});
    CHECK(s.code == kExitPass);
    CHECK(s.out.rfind("t,x,z\n", 0) == 0);

    CHECK(run({"solve", "--noise", "gaussian", "--mean", "0.5"}).code == kExitUsage);
}

TEST_CASE("output directory: flag, environment and precedence") {
    const auto a = temp_dir("flag"), b = temp_dir("env"), c = temp_dir("file");
    CHECK(run({"sample", "--out", a.string()}).code == kExitPass);
    CHECK(fs::exists(a / "configuration.csv"));
    CHECK(fs::exists(a / "configuration_meta.csv"));

    ::setenv(kOutputDirEnv, b.string().c_str(), 1);
    CHECK(run({"sample"}).code == kExitPass);
    CHECK(fs::exists(b / "configuration.csv"));

    // Flag beats environment, environment beats file.
    const auto cfg = temp_dir("cfg").string() + ".cfg";
    {
        std::ofstream f(cfg);
        f << "out = " << c.string() << "\nseed = 11\n";
    }
    fs::remove_all(b);
    CHECK(run({"sample", "--config", cfg}).code == kExitPass);
    CHECK(fs::exists(b / "configuration.csv"));
    CHECK_FALSE(fs::exists(c));
    fs::remove_all(a);
    CHECK(run({"sample", "--config", cfg, "--out", a.string()}).code == kExitPass);
    CHECK(fs::exists(a / "configuration.csv"));
    ::unsetenv(kOutputDirEnv);
    CHECK(run({"sample", "--config", cfg}).code == kExitPass);
    CHECK(fs::exists(c / "configuration.csv"));

    for (const auto& d : {a, b, c}) fs::remove_all(d);
    fs::remove(cfg);
}

}  // TEST_SUITE
