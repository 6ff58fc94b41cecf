#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hjlab/config.hpp"

namespace hjlab {

/// Process exit codes of the command layer.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitDomain = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

struct CommandContext {
  /// Output directory; empty means the config's output_dir (or the solution directory).
  std::filesystem::path out;
  unsigned threads = 1;
  bool quiet = false;
  std::ostream* stdout_stream = nullptr;
  std::ostream* stderr_stream = nullptr;
};

/// Runs body and maps library errors onto exit codes, reporting them on stderr.
int run_guarded(const CommandContext& ctx, const std::function<int()>& body);

/// Exponents JSON on stdout.
int cmd_params(double gamma, double q, int dim, std::optional<double> delta, const CommandContext& ctx);

/// One solve: u.field, f.field, solution.json, report.json, curve.csv, manifest.json.
int cmd_solve(const RunConfig& cfg, const CommandContext& ctx);

/// ensemble_size solves with seeds seed + i under run_XXXX/, plus aggregate.csv,
/// omega_envelope.csv and manifest.json.
int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx);

/// Norm table with divergence fit and radial residual in counterexample.csv.
int cmd_counterexample(double gamma, int dim, std::optional<double> q, const std::vector<double>& eps_list,
                       const CommandContext& ctx);

/// audit.json next to the solution (or under ctx.out); exit 0 iff every check passes.
int cmd_audit(const std::filesystem::path& solution_dir, const CommandContext& ctx);

/// Re-emits the superlevel curve of a stored solution; explicit k values take
/// precedence over the grid spec.
int cmd_curve(const std::filesystem::path& solution_dir, const KGridSpec& spec, const std::vector<double>& k_values,
              std::optional<double> delta, const CommandContext& ctx);

/// HJLAB_THREADS when set and valid, otherwise 1.
unsigned threads_from_env();

}  // namespace hjlab
