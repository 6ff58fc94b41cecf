#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjlab/commands.hpp"

int main(int argc, char** argv) {
  using namespace hjlab;

  CLI::App app{"Numerical lab for the periodic viscous Hamilton-Jacobi equation -Lap u + |Du|^gamma = f"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "Output directory (or file for single-file outputs)");
  app.add_option("--threads", threads, "Worker threads (default: HJLAB_THREADS or 1)")->check(CLI::Range(1u, 1024u));
  app.add_flag("--quiet", quiet, "Suppress progress output");

  auto* params = app.add_subcommand("params", "Print the exponent bookkeeping for (gamma, q, d)");
  double p_gamma = 0.0, p_q = 0.0;
  int p_dim = 3;
  std::optional<double> p_delta;
  params->add_option("--gamma", p_gamma)->required();
  params->add_option("--q", p_q)->required();
  params->add_option("--dim", p_dim)->required();
  params->add_option("--delta", p_delta);

  auto* solve = app.add_subcommand("solve", "Solve one configured problem");
  auto* sweep = app.add_subcommand("sweep", "Solve a seeded ensemble and aggregate the norms");

  auto* counter = app.add_subcommand("counterexample", "Norm table of the radial critical-exponent family");
  double c_gamma = 3.0;
  int c_dim = 3;
  std::optional<double> c_q;
  std::vector<double> c_eps;
  counter->add_option("--gamma", c_gamma)->required();
  counter->add_option("--dim", c_dim)->required();
  counter->add_option("--q", c_q, "Lebesgue exponent (default: critical)");
  counter->add_option("--eps", c_eps, "Cutoff radii (default: 2^-4 ... 2^-9)")->delimiter(',');

  auto* audit = app.add_subcommand("audit", "Check a stored solution against the proof identities");
  std::string audit_dir;
  audit->add_option("solution_dir", audit_dir)->required();

  auto* curve = app.add_subcommand("curve", "Re-emit the superlevel curve of a stored solution");
  std::string curve_dir;
  KGridSpec spec;
  std::vector<double> k_values;
  std::optional<double> curve_delta;
  curve->add_option("solution_dir", curve_dir)->required();
  curve->add_option("--k-min", spec.k_min);
  curve->add_option("--k-max-factor", spec.k_max_factor);
  curve->add_option("--count", spec.count);
  curve->add_option("--k", k_values, "Explicit k values")->delimiter(',');
  curve->add_option("--delta", curve_delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitDomain;
  }

  CommandContext ctx;
  ctx.out = out_dir;
  ctx.threads = threads ? threads : threads_from_env();
  ctx.quiet = quiet;

  auto with_config = [&](auto&& fn) {
    return run_guarded(ctx, [&] {
      if (config_path.empty()) throw ConfigurationError("--config is required for this subcommand");
      return fn(load_config(config_path));
    });
  };

  if (*params) return cmd_params(p_gamma, p_q, p_dim, p_delta, ctx);
  if (*solve) return with_config([&](const RunConfig& cfg) { return cmd_solve(cfg, ctx); });
  if (*sweep) return with_config([&](const RunConfig& cfg) { return cmd_sweep(cfg, ctx); });
  if (*counter) return cmd_counterexample(c_gamma, c_dim, c_q, c_eps, ctx);
  if (*audit) return cmd_audit(audit_dir, ctx);
  if (*curve) return cmd_curve(curve_dir, spec, k_values, curve_delta, ctx);
  return kExitFailure;
}
