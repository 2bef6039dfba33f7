#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sdmp/domain.hpp"
#include "sdmp/lq.hpp"
#include "sdmp/regression.hpp"

namespace sdmp {

enum class ExperimentKind {
    Simulate,
    Converge,
    Crossterm,
    MPScan,
    LQSolve,
    LQVerify,
    AdjointOracle,
};

std::string to_string(ExperimentKind kind);
// Throws ConfigError listing the accepted names.
ExperimentKind parse_kind(std::string_view name);
std::vector<std::string> experiment_names();

// User-defined coefficients in the expression subset (see expression.hpp).
struct ExpressionProblemConfig {
    std::string drift = "0";
    std::string diffusion = "xd";
    std::string running_cost = "0";
    std::string terminal_cost = "x";
    double T = 1.0;
    double delta = 0.25;
    double initial_state = 1.0;
    double initial_control = 0.0;
    ControlDomain domain = ControlDomain::real_line();

    friend bool operator==(const ExpressionProblemConfig&, const ExpressionProblemConfig&) = default;
};

struct ProblemConfig {
    // A registry name (problem_names()), "lq" for the `lq` block or
    // "expression" for the `expression` block.
    std::string name = "lq-benchmark";
    LQProblem lq;
    ExpressionProblemConfig expression;

    friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct ControlConfig {
    std::string kind = "constant";  // "constant" or "lq-optimal"
    double value = 1.0;

    friend bool operator==(const ControlConfig&, const ControlConfig&) = default;
};

struct SpikeConfig {
    double tau = 0.25;
    double value = -2.0;
    double epsilon = 0.0;  // simulate only; 0 leaves x1 = x2 = 0

    friend bool operator==(const SpikeConfig&, const SpikeConfig&) = default;
};

struct PhiConfig {
    std::string kind = "constant";  // "constant" or "hessian-ratio"
    double value = 1.0;

    friend bool operator==(const PhiConfig&, const PhiConfig&) = default;
};

struct ScanConfig {
    std::size_t cells = 100;
    std::vector<double> values = {-3.0, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 3.0};
    std::uint64_t seed = 17;
    bool expect_violation = false;  // detection mode: PASS iff some cell is violated

    friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

struct PicardConfig {
    int max_iters = 100;
    double damping = 0.5;
    bool adaptive = true;
    double min_damping = 1.0 / 64.0;
    double tolerance = 1e-4;
    R2Placement r2 = R2Placement::Truncated;

    friend bool operator==(const PicardConfig&, const PicardConfig&) = default;
};

// PASS rules. Every experiment reads the subset it needs.
struct Tolerances {
    double z = 3.0;  // stderr multiplier in the gap threshold
    double C = 0.5;  // discretisation allowance C * dt
    double guard = 1e-6;
    double x1_slope_lo = 0.8, x1_slope_hi = 1.2;
    double x2_slope_lo = 1.7, x2_slope_hi = 2.3;
    double lhs_slope_lo = 0.8, lhs_slope_hi = 1.2;
    double residual_slope_min = 1.0;
    double oracle_rel_error = 0.02;
    double riccati_rel_error = 0.02;
    double contraction = 0.9;

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    ProblemConfig problem;
    int steps_per_delay = 8;
    std::uint64_t seed = 1;
    std::size_t paths = 10000;
    std::size_t dump_paths = 0;  // leading paths written to trajectory CSVs
    ControlConfig control;
    SpikeConfig spike;
    std::vector<double> epsilons;  // empty: delta / 4 .. delta / 32
    bool second_order = true;
    PhiConfig phi;
    ScanConfig scan;
    PicardConfig picard;
    int challengers = 20;
    RegressionOptions regression;
    Tolerances tolerances;
    std::string out_dir;  // empty: --out, then $SDMP_OUT_DIR, then ./sdmp-out

    // Builds the problem and grid; throws ConfigError naming the field.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict JSON: unknown keys and mistyped values raise ConfigError naming the
// dotted field, syntax errors name the line and column.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical form: every field, keys sorted, two-space indent.
std::string serialize_config(const ExperimentConfig& config);

// Applies KEY=VALUE with a dotted key to JSON text. VALUE is read as JSON when
// it parses, otherwise as a string.
std::string apply_override(std::string_view json_text, std::string_view assignment);

std::uint64_t fnv1a64(std::string_view bytes);
// Hash of the canonical config with out_dir cleared.
std::uint64_t config_hash(const ExperimentConfig& config);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    std::vector<Check> checks;
    std::vector<std::string> files;  // relative to the output directory, sorted
    std::string summary;             // contents of summary.json

    bool passed() const;
};

// Runs one experiment, writing its CSV files, summary.json and manifest.json
// into `out_dir` (created when missing). Library errors propagate.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Resolution order for the output directory.
std::filesystem::path resolve_out_dir(const std::string& cli_out, const ExperimentConfig& config);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sdmp
