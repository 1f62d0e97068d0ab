#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cilia/analysis.hpp"
#include "cilia/cli.hpp"
#include "cilia/error.hpp"

namespace cilia::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Matrix diagnostics are dense O(dim^3); larger meshes skip them.
constexpr std::size_t kMaxDenseDim = 4000;

unsigned thread_count() {
    const char* env = std::getenv("CILIA_THREADS");
    if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
    const std::string text(env);
    unsigned n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0 || n > 1024) {
        throw ConfigError("CILIA_THREADS: expected an integer in 1..1024, got '" + text + "'");
    }
    return n;
}

/// A density together with its exact cumulative.
struct DensitySource {
    DensityFn rho;
    CumulativeFn phi;
    std::string description;
};

DensitySource tabulated(std::vector<double> xs, std::vector<double> ys, double L, std::string what) {
    return {piecewise_linear_density(xs, ys), piecewise_linear_cumulative(xs, ys, L), std::move(what)};
}

DensitySource parse_table(const std::string& spec, double L) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t pos = 0;
    const std::string body = spec.substr(6);
    while (pos <= body.size()) {
        const auto comma = std::min(body.find(',', pos), body.size());
        const std::string pair = body.substr(pos, comma - pos);
        const auto colon = pair.find(':');
        double x = 0.0;
        double y = 0.0;
        const bool ok = colon != std::string::npos &&
                        std::from_chars(pair.data(), pair.data() + colon, x).ptr == pair.data() + colon &&
                        std::from_chars(pair.data() + colon + 1, pair.data() + pair.size(), y).ptr ==
                            pair.data() + pair.size() &&
                        std::isfinite(x) && std::isfinite(y);
        if (!ok) throw ConfigError("rho: malformed table entry '" + pair + "', expected x:y");
        xs.push_back(x);
        ys.push_back(y);
        pos = comma + 1;
    }
    try {
        return tabulated(std::move(xs), std::move(ys), L, spec);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("rho: ") + e.what());
    }
}

DensitySource density_source(const std::string& name, const RunConfig& cfg) {
    const double L = cfg.physical.L;
    if (name == "zero") return {constant_density(0.0), CumulativeFn{[](double) { return 0.0; }, L}, name};
    if (name == "hill8") return {hill8_density(cfg.rho_a), hill8_cumulative(cfg.rho_a, L), name};
    if (name.rfind("table:", 0) == 0) return parse_table(name, L);

    const bool looks_like_path = name.find('/') != std::string::npos ||
                                 (name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0);
    if (!looks_like_path && !fs::exists(name)) {
        throw ConfigError("rho: unknown density source '" + name +
                          "' (expected zero, hill8, table:x:y,... or a CSV path)");
    }
    auto table = read_csv(name, {"x", "rho"});
    if (table.columns[0].size() < 2) throw InputError(name + ": need at least two density samples");
    try {
        return tabulated(std::move(table.columns[0]), std::move(table.columns[1]), L, name);
    } catch (const DomainError& e) {
        throw InputError(name + ": " + e.what());
    }
}

ForwardModel forward_model(const std::string& name, const RunConfig& cfg, const StepPartition& part) {
    if (name == "step") return StepModel{part};
    if (name == "exact") return ExactModel{};
    if (name.rfind("poly:", 0) == 0) {
        int degree = -1;
        const auto* first = name.data() + 5;
        const auto* last = name.data() + name.size();
        const auto [ptr, ec] = std::from_chars(first, last, degree);
        if (ec == std::errc{} && ptr == last && degree >= 0 && degree <= 8) {
            return PolyModel{polynomial_kernel(degree, cfg.physical)};
        }
    }
    throw ConfigError("model: expected 'step', 'exact' or 'poly:<0..8>', got '" + name + "'");
}

double time_end(const RunConfig& cfg, const StepPartition& part) {
    return cfg.time_grid.end > 0.0 ? cfg.time_grid.end : part.L_m() * part.L_m();
}

std::vector<double> uniform_grid(double end, int points) {
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = end * i / (points - 1);
    t.back() = end;
    return t;
}

std::vector<double> recon_grid(const RunConfig& cfg, const StepPartition& part) {
    const auto mesh = build_mesh(cfg.mesh, cfg.physical, cfg.p, cfg.q, cfg.base_rule);
    auto t = recursion_sample_times(mesh, cfg.mesh);
    t.push_back(0.0);
    t.push_back(part.L_m() * part.L_m());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::vector<double> time_grid(const RunConfig& cfg, const StepPartition& part) {
    return cfg.time_grid.kind == TimeGridKind::Recon ? recon_grid(cfg, part)
                                                     : uniform_grid(time_end(cfg, part), cfg.time_grid.points);
}

SampledSignal forward_signal(const DensitySource& src, const ForwardModel& model,
                             const std::vector<double>& times, const RunConfig& cfg, unsigned threads) {
    if (const auto* step = std::get_if<StepModel>(&model)) {
        SampledSignal sig{times, std::vector<double>(times.size())};
        for (std::size_t i = 0; i < times.size(); ++i) {
            sig.values[i] = I_m_from_cumulative(src.phi, times[i], step->partition, cfg.physical);
        }
        return sig;
    }
    return sample_current(src.rho, model, times, cfg.physical, cfg.quad_tol, threads);
}

class Output {
public:
    Output(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigError("--out: cannot create directory '" + dir_.string() + "'");
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& columns, const std::vector<std::string>& comments = {}) {
        write_csv(path(name), header, columns, comments);
        log_ << "wrote " << path(name) << '\n';
    }

    void json(const std::string& name, const Json& doc) {
        std::ofstream f(path(name), std::ios::binary);
        f << doc.dump(2) << '\n';
        if (!f) throw InputError(path(name) + ": write failed");
        log_ << "wrote " << path(name) << '\n';
    }

private:
    fs::path dir_;
    std::ostream& log_;
};

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json matrix_json(const ReconstructionMesh& mesh, const StepPartition& part, const GeometricMeshSpec& spec) {
    if (mesh.dim() > kMaxDenseDim) {
        return Json{{"skipped", true}, {"reason", "dim exceeds " + std::to_string(kMaxDenseDim)}};
    }
    const auto d = matrix_diagnostics(assemble_matrix(mesh, part, spec), part.a_m());
    return Json{{"dim", d.dim},
                {"lower_triangular", d.lower_triangular},
                {"diagonal_equals_a_m", d.diagonal_equals_a_m},
                {"det", finite_or_null(std::exp(d.log_abs_det))},
                {"log10_abs_det", d.log_abs_det / std::log(10.0)},
                {"expected_log10_det", d.expected_log_det / std::log(10.0)},
                {"det_relative_error", d.det_relative_error},
                {"condition_estimate_1", finite_or_null(d.condition_1)}};
}

Json consistency_json(const ConsistencyReport& r) {
    return Json{{"samples", r.samples},
                {"violations", r.violations},
                {"max_abs_diff", r.max_abs_diff},
                {"max_allowed", r.max_allowed},
                {"max_excess", r.max_excess},
                {"density_nonnegative", r.density_nonnegative},
                {"self_consistent", r.violations == 0 && r.density_nonnegative}};
}

/// Runs the reconstruction pipeline on g and writes density.csv.
struct PipelineResult {
    ReconstructionMesh mesh;
    std::vector<double> G;
    DensityEstimate estimate;
};

PipelineResult reconstruct_pipeline(const GFunction& g, const RunConfig& cfg, const StepPartition& part,
                                    unsigned threads) {
    PipelineResult r{build_mesh(cfg.mesh, cfg.physical, cfg.p, cfg.q, cfg.base_rule), {}, {}};
    r.G = reconstruct_G(g, r.mesh, part, cfg.mesh, threads);
    r.estimate = density_from_G(r.mesh, r.G, g.offset);
    return r;
}

void write_density(Output& out, const DensityEstimate& est, const std::vector<std::string>& comments = {}) {
    const std::size_t n = est.Y.size();
    std::vector<double> x(est.X.begin(), est.X.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> phi(est.phi_tilde.begin(), est.phi_tilde.begin() + static_cast<std::ptrdiff_t>(n));
    out.csv("density.csv", {"x", "rho", "phi_tilde", "phi_tilde_raw_diff"}, {x, est.Y, phi, est.Y_raw}, comments);
}

Json estimate_json(const DensityEstimate& est) {
    const auto negatives = std::count_if(est.Y_raw.begin(), est.Y_raw.end(), [](double y) { return y < 0.0; });
    const double min_raw = est.Y_raw.empty() ? 0.0 : *std::min_element(est.Y_raw.begin(), est.Y_raw.end());
    return Json{{"offset", est.offset}, {"negative_raw_slopes", negatives}, {"min_raw_slope", min_raw}};
}

std::function<double(double)> linear_interpolant(const SampledSignal& sig) {
    return [&sig](double t) {
        const auto& ts = sig.times;
        if (t <= ts.front()) return sig.values.front();
        if (t >= ts.back()) return sig.values.back();
        const auto hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
        const double u = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
        return sig.values[hi - 1] + u * (sig.values[hi] - sig.values[hi - 1]);
    };
}

double max_interpolation_bound(const GFunction& g, const ReconstructionMesh& mesh, const GeometricMeshSpec& spec) {
    double bound = 0.0;
    for (const double t : recursion_arguments(mesh, spec)) bound = std::max(bound, g.error_bound(t));
    return bound;
}

// Commands --------------------------------------------------------------------

int cmd_forward(const RunConfig& cfg, Output& out, unsigned threads) {
    const auto part = geometric_partition(cfg.mesh, cfg.physical);
    const auto model = forward_model(cfg.model, cfg, part);
    const auto src = density_source(cfg.rho, cfg);
    const auto sig = forward_signal(src, model, time_grid(cfg, part), cfg, threads);
    out.csv("current.csv", {"t", "I"}, {sig.times, sig.values});
    return kOk;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& input, Output& out, unsigned threads) {
    const auto part = geometric_partition(cfg.mesh, cfg.physical);
    auto table = read_csv(input, {"t", "I"});
    SampledSignal sig{std::move(table.columns[0]), std::move(table.columns[1])};
    GFunction g;
    try {
        sig.validate();
        g = g_from_signal(sig, part, cfg.mesh, cfg.physical);
    } catch (const DomainError& e) {
        throw InputError(input + ": " + e.what());
    }
    const auto r = reconstruct_pipeline(g, cfg, part, threads);
    write_density(out, r.estimate);

    const auto report = forward_consistency(r.estimate, g, linear_interpolant(sig), r.mesh, part, cfg.mesh,
                                            cfg.physical);
    Json doc;
    doc["input"] = input;
    doc["samples"] = sig.times.size();
    doc["mesh"] = Json{{"p", cfg.p}, {"q", cfg.q}, {"dim", r.mesh.dim()}};
    doc["matrix"] = matrix_json(r.mesh, part, cfg.mesh);
    doc["interpolation_error_bound"] = max_interpolation_bound(g, r.mesh, cfg.mesh);
    doc["estimate"] = estimate_json(r.estimate);
    doc["forward_consistency"] = consistency_json(report);
    out.json("reconstruction.json", doc);
    return kOk;
}

int cmd_diagnose(const RunConfig& cfg, Output& out, unsigned threads) {
    const auto part = geometric_partition(cfg.mesh, cfg.physical);
    const double bound = gamma0_bound(part);
    const double gamma = cfg.gamma_auto ? bound + 1.0 : cfg.gamma;
    const double s_max = default_s_max(part);

    Json doc;
    doc["partition"] = Json{{"m", part.m}, {"alphas", part.alphas}, {"a", part.a},
                            {"betas", part.betas}, {"L_k", part.Lk}};
    doc["gamma0_bound"] = finite_or_null(bound);
    doc["gamma"] = gamma;

    const auto cg = c_gamma(gamma, part, s_max, cfg.s_samples, threads);
    const auto cg_fine = c_gamma(gamma, part, s_max, 2 * cfg.s_samples - 1, threads);
    const double change = std::abs(cg_fine.value - cg.value) / std::max(std::abs(cg.value), 1e-300);
    doc["c_gamma"] = Json{{"value", cg.value},
                          {"grid_min", cg.grid_min},
                          {"s_argmin", cg.s_argmin},
                          {"s_max", cg.s_max},
                          {"samples", cg.samples},
                          {"certified", cg.certified},
                          {"certificate", cg.certificate},
                          {"above_certificate", cg.certified && cg.value >= cg.certificate},
                          {"half_spacing_value", cg_fine.value},
                          {"half_spacing_relative_change", change}};

    const auto mesh = build_mesh(cfg.mesh, cfg.physical, cfg.p, cfg.q, cfg.base_rule);
    doc["matrix"] = matrix_json(mesh, part, cfg.mesh);

    Json scan = Json::array();
    for (const auto& s : collision_scan(cfg.scan_k_max, cfg.scan_n_max)) {
        Json solutions = Json::array();
        for (const auto& sol : s.solutions) solutions.push_back(Json{{"n_i", sol.n_i}, {"n", sol.n}});
        scan.push_back(Json{{"k", s.k},
                            {"n_max", s.n_max},
                            {"multisets", s.multisets},
                            {"solutions", s.solutions.size()},
                            {"residue_mod8", s.lhs_residue_mod8},
                            {"residue_checked_for_all", s.residue_checked_for_all},
                            {"congruence_admits_solutions", s.congruence_admits_solutions},
                            {"witnesses", solutions}});
    }
    doc["collision_scan"] = scan;
    out.json("diagnose.json", doc);

    if (cfg.profile_samples > 0) {
        const auto profile = lambda_profile(gamma, part, s_max, cfg.profile_samples);
        std::vector<double> s;
        std::vector<double> lam;
        for (const auto& [si, li] : profile) {
            s.push_back(si);
            lam.push_back(li);
        }
        out.csv("lambda.csv", {"s", "Lambda"}, {s, lam});
    }
    return kOk;
}

int demo_hill8(RunConfig cfg, Output& out, unsigned threads) {
    if (!cfg.explicit_keys.contains("L")) cfg.physical.L = 3.0;
    const double L = cfg.physical.L;
    const auto part = geometric_partition(cfg.mesh, cfg.physical);
    const auto rho = hill8_density(cfg.rho_a);
    const auto phi = hill8_cumulative(cfg.rho_a, L);

    constexpr int kProfilePoints = 301;
    std::vector<double> x(kProfilePoints), r(kProfilePoints), f(kProfilePoints);
    for (int i = 0; i < kProfilePoints; ++i) {
        const auto k = static_cast<std::size_t>(i);
        x[k] = i * L / (kProfilePoints - 1);
        r[k] = rho(x[k]);
        f[k] = phi(x[k]);
    }
    out.csv("profile.csv", {"x", "rho", "phi"}, {x, r, f});

    const auto sig = forward_signal({rho, phi, "hill8"}, StepModel{part}, recon_grid(cfg, part), cfg, threads);
    out.csv("current.csv", {"t", "I"}, {sig.times, sig.values});

    const auto g = g_from_signal(sig, part, cfg.mesh, cfg.physical);
    const auto res = reconstruct_pipeline(g, cfg, part, threads);
    const auto& est = res.estimate;
    const double phi_L = phi(L);
    std::vector<double> exact(est.X.size()), err(est.X.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < est.X.size(); ++i) {
        exact[i] = phi(est.X[i]) - phi_L;
        err[i] = est.phi_tilde[i] - exact[i];
        max_err = std::max(max_err, std::abs(err[i]));
    }
    out.csv("reconstruction.csv", {"x", "phi_tilde", "phi_tilde_exact", "error"}, {est.X, est.phi_tilde, exact, err});
    write_density(out, est);

    constexpr double kRoundTripTol = 1e-8;
    Json doc;
    doc["demo"] = "hill8";
    doc["a"] = cfg.rho_a;
    doc["L"] = L;
    doc["mesh"] = Json{{"p", cfg.p}, {"q", cfg.q}, {"dim", res.mesh.dim()}};
    doc["phi_at_a"] = phi(cfg.rho_a);
    doc["offset"] = est.offset;
    doc["offset_exact"] = phi_L;
    doc["max_abs_error"] = max_err;
    doc["tolerance"] = kRoundTripTol;
    doc["passed"] = max_err <= kRoundTripTol;
    doc["matrix"] = matrix_json(res.mesh, part, cfg.mesh);
    out.json("summary.json", doc);

    if (!(max_err <= kRoundTripTol)) throw NumericalError("hill8 round-trip error exceeds tolerance", max_err);
    return kOk;
}

/// Delayed sigmoidal current: zero up to the delay, then a Hill rise.
struct DelayedSigmoid {
    double delay = 30.0;
    double exponent = 2.2;
    double amplitude = 150.0;
    double half_time = 100.0;

    double operator()(double t) const {
        if (t <= delay) return 0.0;
        return amplitude / (1.0 + std::pow(half_time / (t - delay), exponent));
    }
};

int demo_french(RunConfig cfg, Output& out, unsigned threads) {
    // A cilium long against the diffusion length over the recording window;
    // at L <= 100 the delayed onset admits no nonnegative density.
    if (!cfg.explicit_keys.contains("L")) cfg.physical.L = 300.0;
    const auto& pp = cfg.physical;
    const auto part = geometric_partition(cfg.mesh, pp);
    const DelayedSigmoid current;

    const auto times = cfg.explicit_keys.contains("time_grid") ? time_grid(cfg, part) : recon_grid(cfg, part);
    SampledSignal sig{times, std::vector<double>(times.size())};
    std::transform(times.begin(), times.end(), sig.values.begin(), current);

    const std::vector<std::string> units = {
        "dimensionless units: D = " + format_number(pp.D) + ", L = " + format_number(pp.L) +
            ", c0 = " + format_number(pp.c0) + ", J0 = " + format_number(pp.J0),
        "I(t) = 150 / (1 + (100 / (t - 30))^2.2) for t > 30, else 0"};
    out.csv("current.csv", {"t", "I"}, {sig.times, sig.values}, units);

    const auto g = g_from_signal(sig, part, cfg.mesh, pp);
    const auto res = reconstruct_pipeline(g, cfg, part, threads);
    write_density(out, res.estimate, units);
    const auto report = forward_consistency(res.estimate, g, current, res.mesh, part, cfg.mesh, pp);

    Json doc;
    doc["demo"] = "french";
    doc["units"] = units.front();
    doc["current"] = Json{{"delay", current.delay},
                          {"exponent", current.exponent},
                          {"amplitude", current.amplitude},
                          {"half_time", current.half_time},
                          {"I_at_30", current(30.0)},
                          {"I_at_130", current(130.0)}};
    doc["time_samples"] = times.size();
    doc["time_end"] = times.back();
    doc["mesh"] = Json{{"p", cfg.p}, {"q", cfg.q}, {"dim", res.mesh.dim()}};
    doc["interpolation_error_bound"] = max_interpolation_bound(g, res.mesh, cfg.mesh);
    doc["estimate"] = estimate_json(res.estimate);
    doc["forward_consistency"] = consistency_json(report);
    doc["matrix"] = matrix_json(res.mesh, part, cfg.mesh);
    out.json("summary.json", doc);

    if (report.violations != 0 || !report.density_nonnegative) {
        throw NumericalError("french reconstruction is not self-consistent within the interpolation bound",
                             report.max_excess);
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recover channel densities from cilium current traces."};
    app.name("cilia");
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "Key-value configuration file");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();

    std::string model;
    std::string rho;
    auto* forward = app.add_subcommand("forward", "Compute a current trace from a density");
    forward->add_option("--model", model, "step | exact | poly:<degree>");
    forward->add_option("--rho", rho, "zero | hill8 | table:x:y,... | CSV path");

    std::string input;
    auto* reconstruct = app.add_subcommand("reconstruct", "Recover the density from a current trace");
    reconstruct->add_option("--input", input, "Current CSV (default <out>/current.csv)");

    auto* diagnose = app.add_subcommand("diagnose", "Stability and mesh diagnostics");

    std::string demo_name;
    auto* demo = app.add_subcommand("demo", "Run a built-in demonstration");
    demo->add_option("name", demo_name, "hill8 | french")->required()->check(CLI::IsMember({"hill8", "french"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "cilia: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!model.empty()) cfg.model = model;
        if (!rho.empty()) cfg.rho = rho;
        const unsigned threads = thread_count();
        Output sink(out_dir, out);

        if (*forward) return cmd_forward(cfg, sink, threads);
        if (*reconstruct) return cmd_reconstruct(cfg, input.empty() ? sink.path("current.csv") : input, sink, threads);
        if (*diagnose) return cmd_diagnose(cfg, sink, threads);
        return demo_name == "hill8" ? demo_hill8(cfg, sink, threads) : demo_french(cfg, sink, threads);
    } catch (const ConfigError& e) {
        err << "cilia: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InputError& e) {
        err << "cilia: input error: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericalError& e) {
        err << "cilia: numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const DomainError& e) {
        err << "cilia: input error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace cilia::cli
