#pragma once

// Run configuration: a single JSON document with a top-level "schema": 1.
//
//   {
//     "schema": 1,
//     "pipeline": "bo-unitary" | "bo-dissipative" | "steady-sweep" | "stability",
//     "bo":    { ... },      bo-unitary, bo-dissipative
//     "loss":  { ... },      bo-dissipative
//     "drive": { ... },      steady-sweep, stability
//     "grids": { ... },
//     "solver": { ... },     optional
//     "mixture": "per-branch" | "averaged-state",   default "per-branch"
//     "threads": 0,          default 0 (machine parallelism)
//     "output": "out.csv"    optional if --out is given
//   }
//
// Unknown keys anywhere are errors. See README.md for every field and default.

#include "optomech/bo_closed.hpp"
#include "optomech/numerics.hpp"

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace optomech::config {

inline constexpr int kSchemaVersion = 1;

enum class Pipeline { BoUnitary, BoDissipative, SteadySweep, Stability };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& name);

/// Thrown by load/parse for malformed JSON (with line and column) and for
/// validation failures (naming the offending field).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// g derived from cavity frequency, cavity length, mirror mass and mechanical
/// frequency in SI units.
struct PhysicalCoupling {
    double cavity_frequency = 0.0;
    double cavity_length = 0.0;
    double mirror_mass = 0.0;
    double mechanical_frequency = 0.0;
    bool operator==(const PhysicalCoupling&) const = default;
};

struct BoSection {
    double Omega = 1.0;
    std::variant<double, PhysicalCoupling> coupling = 0.0; ///< "g" or "physical_coupling"
    double lambda = 0.0;
    std::complex<double> alpha_A{};
    std::complex<double> alpha_B{};
    double n_thermal = 0.0; ///< initial mirror occupancy (bo-dissipative)
    double cutoff_sigmas = 8.0;

    double g() const;
    bool operator==(const BoSection&) const = default;
};

struct LossSection {
    double kappa = 0.0;
    double Gamma = 0.0;
    double n_bath = 0.0;
    bool operator==(const LossSection&) const = default;
};

struct EffectiveDriveSection {
    double g_a_s = 0.0;
    double g_b_s = 0.0;
    bool operator==(const EffectiveDriveSection&) const = default;
};

struct BareDriveSection {
    double eta = 0.0;
    double g = 0.0;
    bool operator==(const BareDriveSection&) const = default;
};

struct DriveSection {
    double Omega = 1.0;
    double lambda = 0.0;
    double kappa = 0.0;
    double gamma_m = 0.0;
    std::variant<EffectiveDriveSection, BareDriveSection> kind = EffectiveDriveSection{};
    bool operator==(const DriveSection&) const = default;
};

/// Evenly spaced, endpoints included.
struct GridRange {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool operator==(const GridRange&) const = default;
};

/// Either an explicit list or a range.
struct Grid {
    std::variant<std::vector<double>, GridRange> spec;
    std::vector<double> values() const;
    bool operator==(const Grid&) const = default;
};

/// t_k = k t_max / n_steps for k = 0..n_steps.
struct TimeGrid {
    double t_max = 0.0;
    int n_steps = 0;
    std::vector<double> values() const;
    bool operator==(const TimeGrid&) const = default;
};

struct Grids {
    std::optional<TimeGrid> time; ///< BO pipelines; defaults to t_max 100, n_steps 1000
    std::optional<Grid> n_thermal;
    std::optional<Grid> delta;
    std::optional<Grid> nbar;
    bool operator==(const Grids&) const = default;
};

struct RunConfig {
    int schema = kSchemaVersion;
    Pipeline pipeline = Pipeline::BoUnitary;
    std::optional<BoSection> bo;
    std::optional<LossSection> loss;
    std::optional<DriveSection> drive;
    Grids grids;
    numerics::Tolerances solver;
    bo::MixtureMode mixture = bo::MixtureMode::PerBranch;
    int threads = 0;
    std::optional<std::filesystem::path> output;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Checks pipeline/section/grid consistency and parameter ranges; throws
/// ConfigError naming the field.
void validate(const RunConfig& config);

/// Canonical JSON (sections present in the config, every field explicit).
std::string write_config(const RunConfig& config);

} // namespace optomech::config
