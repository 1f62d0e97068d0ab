#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "cilia/cli.hpp"

namespace cilia::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Context {
    std::string where;  // "source:line"
    std::string key;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(where + ": key '" + key + "': " + what);
    }
};

double to_double(const std::string& text, const Context& ctx) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) ctx.fail("expected a finite number, got '" + text + "'");
    return v;
}

int to_int(const std::string& text, const Context& ctx) {
    int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) ctx.fail("expected an integer, got '" + text + "'");
    return v;
}

bool valid_model_name(const std::string& v) {
    if (v == "step" || v == "exact") return true;
    if (v.rfind("poly:", 0) != 0) return false;
    const std::string degree = v.substr(5);
    int d = -1;
    const auto [ptr, ec] = std::from_chars(degree.data(), degree.data() + degree.size(), d);
    return ec == std::errc{} && ptr == degree.data() + degree.size() && d >= 0 && d <= 8;
}

using Setter = std::function<void(RunConfig&, const std::string&, const Context&)>;

template <class Access>
Setter positive(Access field) {
    return [field](RunConfig& c, const std::string& v, const Context& ctx) {
        const double x = to_double(v, ctx);
        if (x <= 0.0) ctx.fail("must be positive");
        field(c) = x;
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"D", positive([](RunConfig& c) -> double& { return c.physical.D; })},
        {"L", positive([](RunConfig& c) -> double& { return c.physical.L; })},
        {"c0", positive([](RunConfig& c) -> double& { return c.physical.c0; })},
        {"J0", positive([](RunConfig& c) -> double& { return c.physical.J0; })},
        {"hill_n", positive([](RunConfig& c) -> double& { return c.physical.hill.n; })},
        {"hill_K", positive([](RunConfig& c) -> double& { return c.physical.hill.K_half; })},
        {"beta0", positive([](RunConfig& c) -> double& { return c.mesh.beta0; })},
        {"rho_a", positive([](RunConfig& c) -> double& { return c.rho_a; })},
        {"beta",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0 && x < 1.0)) ctx.fail("must lie in (0, 1)");
             c.mesh.beta = x;
         }},
        {"m",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1 || x > 64) ctx.fail("must lie in 1..64");
             c.mesh.m = x;
         }},
        {"p",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1 || x > 400) ctx.fail("must lie in 1..400");
             c.p = x;
         }},
        {"q",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1 || x > 100000) ctx.fail("must lie in 1..100000");
             c.q = x;
         }},
        {"base_rule",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             if (v != "uniform") ctx.fail("only 'uniform' is supported");
             c.base_rule = BaseRule::Uniform;
         }},
        {"quad_tol",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0 && x < 1.0)) ctx.fail("must lie in (0, 1)");
             c.quad_tol = x;
         }},
        {"k_max",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1) ctx.fail("must be at least 1");
             c.k_max = x;
         }},
        {"time_grid",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             if (v == "uniform") {
                 c.time_grid.kind = TimeGridKind::Uniform;
             } else if (v == "recon") {
                 c.time_grid.kind = TimeGridKind::Recon;
             } else {
                 ctx.fail("expected 'uniform' or 'recon'");
             }
         }},
        {"time_points",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 2) ctx.fail("must be at least 2");
             c.time_grid.points = x;
         }},
        {"time_end",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             if (v == "auto") {
                 c.time_grid.end = 0.0;
                 return;
             }
             const double x = to_double(v, ctx);
             if (x <= 0.0) ctx.fail("must be positive or 'auto'");
             c.time_grid.end = x;
         }},
        {"model",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             if (!valid_model_name(v)) ctx.fail("expected 'step', 'exact' or 'poly:<0..8>'");
             c.model = v;
         }},
        {"rho", [](RunConfig& c, const std::string& v, const Context&) { c.rho = v; }},
        {"gamma",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             if (v == "auto") {
                 c.gamma_auto = true;
                 return;
             }
             c.gamma = to_double(v, ctx);
             c.gamma_auto = false;
         }},
        {"s_samples",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1000) ctx.fail("must be at least 1000");
             c.s_samples = x;
         }},
        {"profile_samples",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x != 0 && x < 2) ctx.fail("must be 0 or at least 2");
             c.profile_samples = x;
         }},
        {"scan_k_max",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1 || x > 8) ctx.fail("must lie in 1..8");
             c.scan_k_max = x;
         }},
        {"scan_n_max",
         [](RunConfig& c, const std::string& v, const Context& ctx) {
             const int x = to_int(v, ctx);
             if (x < 1 || x > 200) ctx.fail("must lie in 1..200");
             c.scan_n_max = x;
         }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::map<std::string, int> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        Context ctx{source + ":" + std::to_string(number), {}};
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(ctx.where + ": expected 'key = value', got '" + line + "'");
        }
        ctx.key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(ctx.key);
        if (it == setters().end()) throw ConfigError(ctx.where + ": unknown key '" + ctx.key + "'");
        if (const auto prev = seen.find(ctx.key); prev != seen.end()) {
            ctx.fail("already set on line " + std::to_string(prev->second));
        }
        if (value.empty()) ctx.fail("missing value");
        it->second(cfg, value, ctx);
        seen[ctx.key] = number;
        cfg.explicit_keys.insert(ctx.key);
    }

    // Cross-key invariant: the geometric thresholds must stay inside (0, c0).
    try {
        geometric_partition(cfg.mesh, cfg.physical);
    } catch (const std::exception& e) {
        std::string where = source;
        for (const char* key : {"beta0", "beta", "m", "D"}) {
            if (const auto k = seen.find(key); k != seen.end()) {
                where += ":" + std::to_string(k->second);
                break;
            }
        }
        throw ConfigError(where + ": mesh parameters give an invalid partition: " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse_config(in, path);
}

std::string default_config_text() {
    return R"(# physical constants
D = 1
L = 1
c0 = 1
J0 = 1
hill_n = 2
hill_K = 0.5
# geometric step kernel
beta = 0.8
beta0 = 1
m = 8
# reconstruction mesh
p = 20
q = 16
base_rule = uniform
k_max = 200
# forward evaluation
quad_tol = 1e-10
time_grid = uniform     # uniform | recon
time_points = 2001
time_end = auto         # auto = L_m^2
model = step            # step | exact | poly:<degree 0..8>
rho = hill8             # zero | hill8 | table:x:y,x:y,... | path to CSV (x,rho)
rho_a = 1.5
# diagnostics
gamma = auto            # auto = gamma0 bound + 1
s_samples = 100000
profile_samples = 2001
scan_k_max = 8
scan_n_max = 30
)";
}

}  // namespace cilia::cli
