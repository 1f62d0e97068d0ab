#pragma once

#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cilia/reconstruction.hpp"

namespace cilia::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kInputError = 3, kNumericalError = 4 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TimeGridKind { Uniform, Recon };

struct TimeGridSpec {
    TimeGridKind kind = TimeGridKind::Uniform;
    int points = 2001;
    double end = 0.0;  ///< 0 selects L_m^2
};

struct RunConfig {
    PhysicalParams physical;
    GeometricMeshSpec mesh;
    int p = 20;
    int q = 16;
    BaseRule base_rule = BaseRule::Uniform;
    double quad_tol = 1e-10;
    int k_max = 200;
    TimeGridSpec time_grid;
    std::string model = "step";
    std::string rho = "hill8";
    double rho_a = 1.5;
    double gamma = 0.0;  ///< used when gamma_auto is false
    bool gamma_auto = true;
    int s_samples = 100000;
    int profile_samples = 2001;  ///< 0 disables lambda.csv
    int scan_k_max = 8;
    int scan_n_max = 30;
    std::set<std::string> explicit_keys;  ///< keys present in the file
};

/// Parse `key = value` lines; '#' starts a comment. Errors name the source
/// and line.
RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::string& path);
/// Documented key list with defaults, in config-file syntax.
std::string default_config_text();

// CSV -----------------------------------------------------------------------

std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

/// Reads a comma-separated file whose first non-comment line is the header.
/// Lines starting with '#' are skipped. Throws InputError naming the line.
CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected_header);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& comments = {});

// Entry point -----------------------------------------------------------------

/// Runs the tool and returns its exit code. Diagnostics go to `err`, the
/// list of written files to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cilia::cli
