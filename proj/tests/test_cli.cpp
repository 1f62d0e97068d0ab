#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "cilia/cli.hpp"

using namespace cilia;
using namespace cilia::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("cilia_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    fs::path path_;
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "cilia");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

}  // namespace

TEST_CASE("config parsing") {
    const auto defaults = parse(default_config_text());
    const RunConfig fresh;
    CHECK(defaults.physical.L == fresh.physical.L);
    CHECK(defaults.mesh.m == fresh.mesh.m);
    CHECK(defaults.p == fresh.p);
    CHECK(defaults.model == fresh.model);
    CHECK(defaults.gamma_auto);

    const auto cfg = parse("# comment\n  L = 3   # trailing\n\nm=5\nmodel = poly:4\ngamma = 2.5\ntime_grid = recon\n");
    CHECK(cfg.physical.L == 3.0);
    CHECK(cfg.mesh.m == 5);
    CHECK(cfg.model == "poly:4");
    CHECK_FALSE(cfg.gamma_auto);
    CHECK(cfg.gamma == 2.5);
    CHECK(cfg.time_grid.kind == TimeGridKind::Recon);
    CHECK(cfg.explicit_keys.contains("L"));
    CHECK_FALSE(cfg.explicit_keys.contains("D"));
}

TEST_CASE("config errors name the line") {
    const auto message = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("L = 1\nbeta = 1.5\n").find("test.cfg:2") != std::string::npos);
    CHECK(message("L = 1\n\nL = 2\n").find("already set on line 1") != std::string::npos);
    CHECK(message("colour = red\n").find("test.cfg:1: unknown key 'colour'") != std::string::npos);
    CHECK(message("D = -1\n").find("must be positive") != std::string::npos);
    CHECK(message("m = 2.5\n").find("expected an integer") != std::string::npos);
    CHECK(message("q =\n").find("missing value") != std::string::npos);
    CHECK(message("just words\n").find("expected 'key = value'") != std::string::npos);
    CHECK(message("model = spline\n").find("test.cfg:1") != std::string::npos);
    CHECK(message("L = 1e999\n").find("finite number") != std::string::npos);
    // thresholds collapse to zero once beta0 / (2 sqrt D) is huge
    CHECK(message("D = 1e-6\nbeta0 = 50\n").find("invalid partition") != std::string::npos);
}

TEST_CASE("CSV round trip is exact") {
    TempDir dir;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1e3);
    std::vector<double> a(50), b(50);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng) * 1e-200;
    write_csv(dir / "x.csv", {"t", "I"}, {a, b}, {"a comment"});
    const auto table = read_csv(dir / "x.csv", {"t", "I"});
    CHECK(table.columns[0] == a);
    CHECK(table.columns[1] == b);
    CHECK(read_file(dir / "x.csv").rfind("# a comment\nt,I\n", 0) == 0);

    write_file(dir / "bad.csv", "t,I\n0,1\n1\n");
    CHECK_THROWS_WITH_AS(read_csv(dir / "bad.csv", {"t", "I"}), doctest::Contains("bad.csv:3"), InputError);
    write_file(dir / "empty.csv", "# nothing\n");
    CHECK_THROWS_AS(read_csv(dir / "empty.csv", {"t", "I"}), InputError);
    CHECK_THROWS_AS(read_csv(dir / "missing.csv", {"t", "I"}), InputError);
}

TEST_CASE("exit codes") {
    TempDir dir;
    CHECK(invoke({}).code == kConfigError);
    CHECK(invoke({"frobnicate"}).code == kConfigError);
    CHECK(invoke({"demo", "nope"}).code == kConfigError);
    CHECK(invoke({"--help"}).code == kOk);

    write_file(dir / "bad.cfg", "L = 1\nbeta = 7\n");
    const auto bad = invoke({"--config", dir / "bad.cfg", "diagnose", "--out", dir.str()});
    CHECK(bad.code == kConfigError);
    CHECK(bad.err.find("bad.cfg:2") != std::string::npos);
    CHECK(invoke({"--config", dir / "absent.cfg", "diagnose"}).code == kConfigError);

    CHECK(invoke({"forward", "--rho", "mystery", "--out", dir.str()}).code == kConfigError);
    CHECK(invoke({"forward", "--rho", "table:0:1,oops", "--out", dir.str()}).code == kConfigError);
    CHECK(invoke({"forward", "--model", "poly:12", "--out", dir.str()}).code == kConfigError);
    CHECK(invoke({"forward", "--rho", dir / "absent.csv", "--out", dir.str()}).code == kInputError);

    write_file(dir / "short.csv", "t,I\n0,0\n1,1\n");
    CHECK(invoke({"reconstruct", "--input", dir / "short.csv", "--out", dir.str()}).code == kInputError);
    write_file(dir / "garbled.csv", "time,current\n0,0\n");
    CHECK(invoke({"reconstruct", "--input", dir / "garbled.csv", "--out", dir.str()}).code == kInputError);
    write_file(dir / "unsorted.csv", "t,I\n0,0\n40,1\n20,1\n");
    CHECK(invoke({"reconstruct", "--input", dir / "unsorted.csv", "--out", dir.str()}).code == kInputError);
}

TEST_CASE("zero density gives zero current and zero reconstruction") {
    TempDir dir;
    REQUIRE(invoke({"forward", "--rho", "zero", "--out", dir.str()}).code == kOk);
    const auto current = read_csv(dir / "current.csv", {"t", "I"});
    CHECK(current.columns[0].size() == 2001);
    for (double v : current.columns[1]) CHECK(v == 0.0);

    REQUIRE(invoke({"reconstruct", "--out", dir.str()}).code == kOk);
    const auto density = read_csv(dir / "density.csv", {"x", "rho", "phi_tilde", "phi_tilde_raw_diff"});
    for (std::size_t c = 1; c < density.columns.size(); ++c) {
        for (double v : density.columns[c]) CHECK(v == 0.0);
    }
}

TEST_CASE("forward then reconstruct recovers the hill8 cumulative") {
    TempDir dir;
    write_file(dir / "run.cfg", "L = 3\ntime_grid = recon\n");
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--rho", "hill8", "--model", "step", "--out", dir.str()}).code == kOk);
    REQUIRE(invoke({"--config", dir / "run.cfg", "reconstruct", "--out", dir.str()}).code == kOk);

    const auto density = read_csv(dir / "density.csv", {"x", "rho", "phi_tilde", "phi_tilde_raw_diff"});
    const auto phi = hill8_cumulative(1.5, 3.0);
    for (std::size_t i = 0; i < density.columns[0].size(); ++i) {
        const double x = density.columns[0][i];
        CHECK(std::abs(density.columns[2][i] - (phi(x) - phi(3.0))) <= 1e-8);
    }
    const auto report = nlohmann::json::parse(read_file(dir / "reconstruction.json"));
    CHECK(report["matrix"]["det_relative_error"].get<double>() <= 1e-12);
    CHECK(report["interpolation_error_bound"].get<double>() == 0.0);
    CHECK(report["forward_consistency"]["self_consistent"].get<bool>());
}

TEST_CASE("tabulated densities from the command line and from CSV agree") {
    TempDir dir;
    write_file(dir / "rho.csv", "x,rho\n0,1\n0.5,2\n1,0.5\n");
    REQUIRE(invoke({"forward", "--rho", "table:0:1,0.5:2,1:0.5", "--out", dir / "a"}).code == kOk);
    REQUIRE(invoke({"forward", "--rho", dir / "rho.csv", "--out", dir / "b"}).code == kOk);
    CHECK(read_file(dir / "a/current.csv") == read_file(dir / "b/current.csv"));
}

TEST_CASE("exact and step currents differ by at most the kernel-gap envelope") {
    TempDir dir;
    write_file(dir / "run.cfg", "time_points = 21\n");
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--rho", "hill8", "--model", "step", "--out", dir / "step"}).code == kOk);
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--rho", "hill8", "--model", "exact", "--out", dir / "exact"}).code == kOk);
    const auto step = read_csv(dir / "step/current.csv", {"t", "I"});
    const auto exact = read_csv(dir / "exact/current.csv", {"t", "I"});

    const PhysicalParams pp;
    const auto part = geometric_partition({}, pp);
    const double phiL = hill8_cumulative(1.5, pp.L)(pp.L);
    double gap = 0.0;
    double lipschitz = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double c = pp.c0 * i / 20000.0;
        gap = std::max(gap, std::abs(hill(c, pp.hill) - step_F_m(c, part, pp)));
        lipschitz = std::max(lipschitz, (hill(c + 1e-6, pp.hill) - hill(c, pp.hill)) / 1e-6);
    }
    for (double a : part.alphas) gap = std::max(gap, std::abs(hill(a, pp.hill) - step_F_m(std::nextafter(a, 0.0), part, pp)));
    for (std::size_t i = 1; i < step.columns[0].size(); ++i) {
        const double t = step.columns[0][i];
        double half_space_gap = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double x = pp.L * k / 200.0;
            half_space_gap = std::max(half_space_gap, std::abs(concentration_series(t, x, pp) - w(t, x, pp)));
        }
        CHECK(std::abs(exact.columns[1][i] - step.columns[1][i]) <= pp.J0 * phiL * (gap + lipschitz * half_space_gap));
    }
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    TempDir dir;
    write_file(dir / "run.cfg", "time_points = 101\n");
    ::setenv("CILIA_THREADS", "1", 1);
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--model", "poly:3", "--out", dir / "one"}).code == kOk);
    ::setenv("CILIA_THREADS", "3", 1);
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--model", "poly:3", "--out", dir / "three"}).code == kOk);
    REQUIRE(invoke({"--config", dir / "run.cfg", "forward", "--model", "poly:3", "--out", dir / "again"}).code == kOk);
    CHECK(read_file(dir / "one/current.csv") == read_file(dir / "three/current.csv"));
    CHECK(read_file(dir / "three/current.csv") == read_file(dir / "again/current.csv"));

    ::setenv("CILIA_THREADS", "zero", 1);
    CHECK(invoke({"forward", "--out", dir / "x"}).code == kConfigError);
    ::unsetenv("CILIA_THREADS");
}

TEST_CASE("diagnose report") {
    TempDir dir;
    write_file(dir / "run.cfg", "s_samples = 20000\nscan_n_max = 12\n");
    REQUIRE(invoke({"--config", dir / "run.cfg", "diagnose", "--out", dir.str()}).code == kOk);
    const auto doc = nlohmann::json::parse(read_file(dir / "diagnose.json"));
    CHECK(doc["matrix"]["det_relative_error"].get<double>() <= 1e-12);
    CHECK(doc["c_gamma"]["certified"].get<bool>());
    CHECK(doc["c_gamma"]["value"].get<double>() >= doc["c_gamma"]["certificate"].get<double>());
    for (const auto& scan : doc["collision_scan"]) {
        if (scan["k"].get<int>() >= 2) CHECK(scan["solutions"].get<int>() == 0);
    }
    CHECK(read_csv(dir / "lambda.csv", {"s", "Lambda"}).columns[0].size() == 2001);
}

TEST_CASE("demos") {
    TempDir dir;
    REQUIRE(invoke({"demo", "hill8", "--out", dir / "hill8"}).code == kOk);
    const auto profile = read_csv(dir / "hill8/profile.csv", {"x", "rho", "phi"});
    REQUIRE(profile.columns[0].size() == 301);
    CHECK(profile.columns[0][150] == 1.5);
    CHECK(profile.columns[2][150] == doctest::Approx(0.5).epsilon(1e-15));
    const auto hill8 = nlohmann::json::parse(read_file(dir / "hill8/summary.json"));
    CHECK(hill8["max_abs_error"].get<double>() <= 1e-8);

    REQUIRE(invoke({"demo", "french", "--out", dir / "french"}).code == kOk);
    const auto current = read_csv(dir / "french/current.csv", {"t", "I"});
    for (std::size_t i = 0; i < current.columns[0].size(); ++i) {
        if (current.columns[0][i] <= 30.0) CHECK(current.columns[1][i] == 0.0);
    }
    CHECK(read_file(dir / "french/current.csv").find("# dimensionless units: D = 1, L = 300") == 0);
    const auto french = nlohmann::json::parse(read_file(dir / "french/summary.json"));
    CHECK(french["current"]["I_at_30"].get<double>() == 0.0);
    CHECK(french["forward_consistency"]["self_consistent"].get<bool>());
    CHECK(french["estimate"]["negative_raw_slopes"].get<int>() == 0);

    // A cilium too short for the delayed onset: the bundle is written, the self-check fails.
    write_file(dir / "short.cfg", "L = 1\n");
    CHECK(invoke({"--config", dir / "short.cfg", "demo", "french", "--out", dir / "short"}).code == kNumericalError);
    CHECK(fs::exists(dir / "short/summary.json"));
    CHECK(french["current"]["I_at_130"].get<double>() == doctest::Approx(75.0).epsilon(1e-14));
}
