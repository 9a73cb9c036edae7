#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shear/cell_model.hpp"
#include "shear/mm.hpp"

namespace shear {

/// Raised for malformed or inconsistent sweep configurations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when output cannot be written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Built-in handbook values: steel, epoxy, silicon.
Material named_material(const std::string& name);

enum class GeometryKind { homogeneous, nested_squares, nested_circles, laminate, separable };

struct InclusionSpec {
    Material material{1.0, 1.0};
    // Shape size relative to the innermost shape.
    double ratio = 1.0;
};

/// Cell parameterised by the filling fraction f.
///
/// nested_squares / nested_circles: the innermost inclusion has area f and
/// every outer shape is `ratio` times its size, listed outermost first.
/// laminate: one inclusion band of width f centred at x1 = 1/2.
/// separable: g = g_inclusion on a central band of width f, g_matrix outside.
/// homogeneous: the matrix material alone; f is ignored.
struct GeometrySpec {
    GeometryKind kind = GeometryKind::nested_squares;
    Material matrix{1.0, 1.0};
    std::vector<InclusionSpec> inclusions;
    double g_matrix = 1.0;
    double g_inclusion = 2.0;
    double density = 1.0;
};

struct FGrid {
    double start = 0.1;
    double stop = 0.7;
    int count = 4;

    std::vector<double> values() const;
};

enum class Method { pwe, mm, both };
enum class OutputFormat { csv, json };

struct SweepConfig {
    GeometrySpec geometry;
    std::vector<int> N{0, 1, 2, 3};
    FGrid f_grid;
    Method method = Method::both;
    MmOptions mm;
    OutputFormat format = OutputFormat::csv;
    std::string output_path = "-";  // "-" is standard output
    bool oracle_mode = false;
};

/// Current schema tag of the JSON config.
inline constexpr const char* kConfigSchema = "shear-sweep/1";

/// Parses a JSON config document. Unknown keys are rejected. Throws ConfigError.
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::string& path);

/// Checks value ranges; throws ConfigError.
void validate_config(const SweepConfig& config);

/// The cell at filling fraction f.
CellField build_field(const GeometrySpec& spec, double f);

struct BoundsResult {
    double f = 0.0;
    int N = 0;
    std::string method;
    double mu_lower = 0.0;
    double mu_upper = 0.0;
    double c_lower = 0.0;
    double c_upper = 0.0;
    double rho_avg = 0.0;
    std::string backend;
    double condition_estimate = 0.0;
    std::string error;
    // Diagnostics not written to the output files.
    int circle_steps = 0;
    int panels = 0;
};

bool operator==(const BoundsResult& a, const BoundsResult& b);

/// sqrt(mu / rho); rejects nonpositive inputs.
double bounds_to_speed(double mu_bound, double rho_avg);

/// One row per (f, N, method), sorted by (f, N, method). Points are computed in
/// parallel; failures are recorded in the row's error field.
std::vector<BoundsResult> run_sweep(const SweepConfig& config);

/// Serial reference for run_sweep.
std::vector<BoundsResult> run_sweep_serial(const SweepConfig& config);

std::string format_csv(const std::vector<BoundsResult>& results);
std::string format_json(const std::vector<BoundsResult>& results);

/// Parses format_json output back into rows (error rows keep NaN bounds).
std::vector<BoundsResult> parse_results_json(const std::string& text);

/// Writes to `path`, or to standard output for "-". Throws OutputError.
void write_output(const std::vector<BoundsResult>& results, OutputFormat format, const std::string& path);

/// Command-line entry point; returns the process exit code
/// (0 ok, 1 point failures, 2 config error, 3 I/O error).
int run_cli(int argc, const char* const* argv);

}  // namespace shear
