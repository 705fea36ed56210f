#pragma once

#include <optional>
#include <string>

#include "forel/analysis.hpp"
#include "forel/json_io.hpp"

namespace forel {

// Equilibrium reference and coupling weights used by the diagnostics:
// the configured override when present, otherwise the maximal-support
// equilibrium (2-player) or the interior equalization solution
// (polymatrix); weights default to the inverse affine scales.
struct DiagnosticsContext {
  std::optional<CouplingReference> unweighted;
  std::optional<CouplingReference> weighted;
  std::optional<EquilibriumReport> equilibrium;
};

DiagnosticsContext ResolveDiagnostics(const ExperimentConfig& cfg);

ScoreState InitialScores(const ExperimentConfig& cfg, std::uint64_t seed);

// Writes trajectory.csv and diagnostics.csv into `out_dir`. Returns the
// process exit code (0 ok, 3 diverged); configuration problems throw
// ConfigError.
int CmdSimulate(const ExperimentConfig& cfg, const std::string& out_dir);

// Re-reads a trajectory CSV and emits the analysis report. The report
// JSON is returned through `report_out` and written to report.json.
int CmdAnalyze(const std::string& trajectory_path, const ExperimentConfig& cfg,
               const std::string& out_dir, std::string* report_out,
               const std::string& format = "json");

int CmdEquilibrium(const Game& game, const std::string& out_dir,
                   std::string* report_out, const std::string& format = "json");

int CmdSweep(const ExperimentConfig& cfg, const std::string& out_dir);

// Full command-line entry point (subcommands simulate | analyze |
// equilibrium | sweep). Exit codes: 0 ok, 2 config error, 3 divergence.
int RunMain(int argc, char** argv);

// Round-trip-exact formatting used in every CSV (17 significant digits).
std::string FormatDouble(double v);

Trajectory ReadTrajectoryCsv(const std::string& path, const Game& game,
                             const RegularizerSet& regs);

}  // namespace forel
