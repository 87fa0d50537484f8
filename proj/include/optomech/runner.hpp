#pragma once

#include "optomech/bo_dissipative.hpp"
#include "optomech/config.hpp"
#include "optomech/langevin.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace optomech::runner {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

inline constexpr const char* kHeaderBoUnitary = "t,n_thermal,negativity";
inline constexpr const char* kHeaderBoDissipative = "t,negativity";
inline constexpr const char* kHeaderSteadySweep = "delta,nbar,stable,neg_m1m2,neg_m1ca,neg_m1cb";
inline constexpr const char* kHeaderStability = "delta,abscissa,stable";

struct RunOverrides {
    std::optional<std::filesystem::path> out;
    std::optional<int> threads;
};

struct RunReport {
    int exit_code = kExitSuccess;
    std::filesystem::path output;
    std::size_t rows = 0;
    std::size_t flagged = 0;
};

/// Parameter objects built from the config sections.
bo::BOParams bo_params(const config::RunConfig& c, double n_thermal);
dissipative::DissipativeParams dissipative_params(const config::RunConfig& c);
langevin::DriveParams drive_params(const config::RunConfig& c);

/// Runs the configured pipeline and writes its CSV atomically. Per-point
/// failures are reported on `log` and flagged in the CSV (exit code 2).
/// Fatal errors propagate as exceptions; the output file is then untouched.
RunReport run(const config::RunConfig& c, const RunOverrides& overrides, std::ostream& log);

} // namespace optomech::runner
