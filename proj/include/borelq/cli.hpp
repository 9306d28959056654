#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace borelq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRuntime = 3;

/// Runs a config: snapshots/, diagnostics.csv, summary.json and SVG plots in
/// the output directory. 2 on invalid config, 3 on a runtime abort (partial
/// diagnostics are still written).
int cmd_evolve(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Prints the JSON report; 0 iff every check passes, 2 for an unknown suite.
int cmd_verify(std::string_view suite, std::ostream& out, std::ostream& err,
               const std::optional<std::filesystem::path>& report_path = {});

/// Dirac lattice and torus flux integrality for a constant field.
int cmd_check_field(double phi0, double e, double hbar, std::ostream& out, std::ostream& err);

/// Linearization fit of gauge images of an exact linear trajectory, one row
/// per gamma, with the configured ablation.
int cmd_gauge_fit(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Runs every *.ini in `dir` (sorted) concurrently; returns the largest exit code.
int cmd_sweep(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

}  // namespace borelq::cli
