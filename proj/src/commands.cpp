#include "hjlab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "hjlab/bernstein.hpp"
#include "hjlab/counterexample.hpp"
#include "hjlab/exponents.hpp"
#include "hjlab/field_io.hpp"
#include "hjlab/format.hpp"
#include "hjlab/manufactured.hpp"
#include "hjlab/persist.hpp"
#include "hjlab/source.hpp"

#ifndef HJLAB_VERSION
#define HJLAB_VERSION "0.0.0"
#endif

namespace hjlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.stdout_stream ? *ctx.stdout_stream : std::cout; }
std::ostream& err_of(const CommandContext& ctx) { return ctx.stderr_stream ? *ctx.stderr_stream : std::cerr; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const RegularityReport& r) {
  return {{"q", r.q},
          {"gamma", r.gamma},
          {"norm_lap_q", r.norm_lap_q},
          {"norm_gradpow_q", r.norm_gradpow_q},
          {"norm_du_l1", r.norm_du_l1},
          {"norm_f_eff_q", r.norm_f_eff_q},
          {"norm_f_raw_q", r.norm_f_raw_q},
          {"M_emp", r.m_emp},
          {"K_emp", r.k_emp}};
}

json exponents_json(const Exponents& e) {
  return {{"gamma", e.gamma},
          {"q", e.q},
          {"d", e.d},
          {"delta", e.delta},
          {"delta_max", e.delta_max},
          {"p", e.p},
          {"p_formula", e.p_formula},
          {"beta", e.beta},
          {"eta", e.eta},
          {"used_fallback", e.used_fallback},
          {"superlevel_exponent", e.superlevel_exponent}};
}

struct RunRecord {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::string dir;  // relative to the manifest directory; "" for a single solve
  std::string status = "pending";
  std::string error;
  bool converged = false;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double residual_inf = std::numeric_limits<double>::quiet_NaN();
  std::optional<RegularityReport> report;
  std::optional<SuperlevelCurve> curve;
  std::optional<double> recovery_error;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  double solve_seconds = 0.0;
  double total_seconds = 0.0;
};

std::string join(const std::string& dir, const std::string& name) { return dir.empty() ? name : dir + "/" + name; }

RunRecord solve_run(const RunConfig& cfg, std::size_t run_index, std::uint64_t seed, const fs::path& root,
                    const std::string& rel_dir, const SpectrumWorkspace& ws) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.run_index = run_index;
  rec.seed = seed;
  rec.dir = rel_dir;
  const fs::path dir = rel_dir.empty() ? root : root / rel_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const GridSpec& grid = ws.grid();
  const Hamiltonian H = cfg.hamiltonian();
  std::optional<ManufacturedSolution> ms;
  if (cfg.manufactured) {
    ms = default_manufactured(cfg.dimension);
    if (4 * ms->band() >= grid.n()) throw ConfigurationError("grid_n too small for the manufactured solution");
  }
  ScalarField f = ms ? manufactured_source(*ms, H, grid) : generate_source(seed, cfg.band_limit, cfg.M_target, cfg.q, ws);
  const ErgodicProblem problem{std::move(f), H, cfg.q};
  if (!problem.above_critical()) {
    rec.warnings.push_back("q = " + format_double(cfg.q) + " is not above the critical exponent d(gamma-1)/gamma = " +
                           format_double(problem.critical_exponent()));
  }
  if (!problem.above_two()) rec.warnings.push_back("q = " + format_double(cfg.q) + " is not above 2");

  const auto ts = std::chrono::steady_clock::now();
  ErgodicSolution sol{ScalarField::zeros(grid)};
  try {
    sol = solve(problem, cfg.solver, ws);
  } catch (const DivergenceError& e) {
    rec.solve_seconds = seconds_since(ts);
    write_field(dir / "f.field", problem.f);
    rec.files.push_back(join(rel_dir, "f.field"));
    rec.status = "diverged";
    rec.error = e.what();
    rec.total_seconds = seconds_since(t0);
    return rec;
  }
  rec.solve_seconds = seconds_since(ts);
  rec.converged = sol.converged;
  rec.status = sol.converged ? "converged" : "not_converged";
  rec.lambda = sol.lambda;
  rec.residual_inf = sol.residual_inf;

  save_solution(dir, sol, problem, cfg.solver, cfg.delta);
  for (const char* name : {"u.field", "f.field", "solution.json"}) rec.files.push_back(join(rel_dir, name));

  const RegularityReport report = regularity_report(sol, problem, ws);
  rec.report = report;
  json rj = report_json(report);
  rj["grid"] = {{"d", grid.dim()}, {"n", grid.n()}};
  rj["lambda"] = sol.lambda;
  rj["admissible"] = problem.admissible();
  if (ms) {
    const ScalarField exact = manufactured_field(*ms, grid);
    const double shift = sol.u.mean() - exact.mean();
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(sol.u[i] - exact[i] - shift));
    rec.recovery_error = err;
    rj["recovery_error"] = err;
  }

  std::optional<Exponents> exps;
  try {
    exps = derive_exponents<double>(cfg.gamma, cfg.q, cfg.dimension, cfg.delta);
  } catch (const DomainError& e) {
    rec.warnings.push_back(std::string("superlevel curve skipped: ") + e.what());
  }
  rj["exponents"] = exps ? exponents_json(*exps) : json(nullptr);
  write_text_atomic(dir / "report.json", rj.dump(2) + "\n");
  rec.files.push_back(join(rel_dir, "report.json"));

  if (exps) {
    const VectorField du = gradient(sol.u, ws);
    const auto k_grid = default_k_grid(du, *exps, cfg.k_grid.k_min, cfg.k_grid.k_max_factor, cfg.k_grid.count);
    rec.curve = superlevel_curve(du, *exps, k_grid);
    write_text_atomic(dir / "curve.csv", curve_csv(*rec.curve));
    rec.files.push_back(join(rel_dir, "curve.csv"));
  }
  rec.total_seconds = seconds_since(t0);
  return rec;
}

json run_json(const RunRecord& rec) {
  json j;
  j["run_index"] = rec.run_index;
  j["seed"] = rec.seed;
  j["dir"] = rec.dir.empty() ? "." : rec.dir;
  j["status"] = rec.status;
  if (!rec.error.empty()) j["error"] = rec.error;
  j["converged"] = rec.converged;
  j["lambda"] = finite_or_null(rec.lambda);
  j["residual_inf"] = finite_or_null(rec.residual_inf);
  j["files"] = rec.files;
  j["timings_s"] = {{"solve", rec.solve_seconds}, {"total", rec.total_seconds}};
  j["report"] = rec.report ? report_json(*rec.report) : json(nullptr);
  if (rec.recovery_error) j["recovery_error"] = *rec.recovery_error;
  j["warnings"] = rec.warnings;
  return j;
}

json manifest_base(const RunConfig& cfg, const CommandContext& ctx, const std::string& command) {
  json m;
  m["tool"] = "hjlab";
  m["version"] = HJLAB_VERSION;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["config"] = json::parse(config_to_json(cfg));
  m["generator"] = cfg.manufactured ? "manufactured" : kSourceGenerator;
  m["threads"] = ctx.threads;
  return m;
}

fs::path output_root(const RunConfig& cfg, const CommandContext& ctx) {
  return ctx.out.empty() ? fs::path(cfg.output_dir) : ctx.out;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

fs::path output_file(const CommandContext& ctx, const fs::path& fallback_dir, const std::string& name) {
  if (ctx.out.empty()) return fallback_dir / name;
  if (ctx.out.has_extension()) {
    if (ctx.out.has_parent_path()) fs::create_directories(ctx.out.parent_path());
    return ctx.out;
  }
  fs::create_directories(ctx.out);
  return ctx.out / name;
}

}  // namespace

unsigned threads_from_env() {
  if (const char* env = std::getenv("HJLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return 1;
}

int run_guarded(const CommandContext& ctx, const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err_of(ctx) << "hjlab: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const AdmissibilityError& e) {
    err_of(ctx) << "hjlab: admissibility error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const DomainError& e) {
    err_of(ctx) << "hjlab: domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ConfigurationError& e) {
    err_of(ctx) << "hjlab: configuration error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const NonConvergenceError& e) {
    err_of(ctx) << "hjlab: solver did not converge: " << e.what() << '\n';
    return kExitSolver;
  } catch (const DivergenceError& e) {
    err_of(ctx) << "hjlab: solver diverged: " << e.what() << '\n';
    return kExitSolver;
  } catch (const EvaluationError& e) {
    err_of(ctx) << "hjlab: evaluation error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const PrecisionError& e) {
    err_of(ctx) << "hjlab: precision error: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kExitSolver;
  } catch (const fs::filesystem_error& e) {
    err_of(ctx) << "hjlab: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err_of(ctx) << "hjlab: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_params(double gamma, double q, int dim, std::optional<double> delta, const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    const Exponents e = derive_exponents<double>(gamma, q, dim, delta);
    out_of(ctx) << exponents_json(e).dump(2) << '\n';
    return kExitOk;
  });
}

int cmd_solve(const RunConfig& cfg, const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    const fs::path root = output_root(cfg, ctx);
    const GridSpec grid(cfg.dimension, cfg.grid_n);
    const SpectrumWorkspace ws(grid);
    const RunRecord rec = solve_run(cfg, 0, cfg.seed, root, "", ws);

    json m = manifest_base(cfg, ctx, "solve");
    m["runs"] = json::array({run_json(rec)});
    m["warnings"] = rec.warnings;
    m["status"] = rec.status;
    write_text_atomic(root / "manifest.json", m.dump(2) + "\n");

    if (!ctx.quiet) {
      out_of(ctx) << "status=" << rec.status << " lambda=" << format_double(rec.lambda)
                  << " residual_inf=" << format_double(rec.residual_inf);
      if (rec.report) out_of(ctx) << " K_emp=" << format_double(rec.report->k_emp);
      if (rec.recovery_error) out_of(ctx) << " recovery_error=" << format_double(*rec.recovery_error);
      out_of(ctx) << '\n';
      for (const auto& w : rec.warnings) err_of(ctx) << "hjlab: warning: " << w << '\n';
    }
    if (rec.status == "diverged") err_of(ctx) << "hjlab: solver diverged: " << rec.error << '\n';
    return rec.converged ? kExitOk : kExitSolver;
  });
}

int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    const fs::path root = output_root(cfg, ctx);
    fs::create_directories(root);
    const GridSpec grid(cfg.dimension, cfg.grid_n);
    const SpectrumWorkspace ws(grid);
    std::vector<RunRecord> records(cfg.ensemble_size);
    std::mutex log_mutex;
    parallel_for(cfg.ensemble_size, ctx.threads, [&](std::size_t i) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu", i);
      records[i] = solve_run(cfg, i, cfg.seed + i, root, name, ws);
      if (!ctx.quiet) {
        std::lock_guard lock(log_mutex);
        err_of(ctx) << "run " << i << ": " << records[i].status << '\n';
      }
    });

    std::string aggregate =
        "run_index,seed,lambda,norm_f_eff,norm_du_l1,M_emp,norm_lap_q,norm_gradpow_q,K_emp_run,converged\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double k_emp = 0.0;
    bool all_converged = true;
    std::vector<SuperlevelCurve> curves;
    std::vector<std::string> provenance;
    for (const auto& rec : records) {
      const RegularityReport r = rec.report.value_or(RegularityReport{cfg.q, cfg.gamma, nan, nan, nan, nan, nan, nan, nan});
      aggregate += std::to_string(rec.run_index) + ',' + std::to_string(rec.seed) + ',' + format_double(rec.lambda) +
                   ',' + format_double(r.norm_f_eff_q) + ',' + format_double(r.norm_du_l1) + ',' +
                   format_double(r.m_emp) + ',' + format_double(r.norm_lap_q) + ',' + format_double(r.norm_gradpow_q) +
                   ',' + format_double(r.k_emp) + ',' + (rec.converged ? "true" : "false") + '\n';
      all_converged = all_converged && rec.converged;
      if (rec.converged && rec.report) k_emp = std::max(k_emp, rec.report->k_emp);
      if (rec.converged && rec.curve) {
        curves.push_back(*rec.curve);
        provenance.push_back(rec.dir);
      }
    }
    write_text_atomic(root / "aggregate.csv", aggregate);

    json m = manifest_base(cfg, ctx, "sweep");
    json runs = json::array();
    std::vector<std::string> warnings;
    for (const auto& rec : records) {
      runs.push_back(run_json(rec));
      for (const auto& w : rec.warnings) warnings.push_back("run " + std::to_string(rec.run_index) + ": " + w);
    }
    m["runs"] = runs;
    std::vector<std::string> files = {"aggregate.csv"};
    if (!curves.empty()) {
      const OmegaEnvelope env = omega_envelope(curves, provenance);
      write_text_atomic(root / "omega_envelope.csv", envelope_csv(env));
      files.push_back("omega_envelope.csv");
      m["omega_envelope"] = {{"e_at_0.01", env.at(0.01)}, {"e_at_0.5", env.at(0.5)}, {"runs", provenance}};
    } else {
      warnings.push_back("no superlevel curves available; omega envelope skipped");
    }
    m["files"] = files;
    m["K_emp"] = k_emp;
    m["all_converged"] = all_converged;
    m["warnings"] = warnings;
    m["status"] = all_converged ? "complete" : "incomplete";
    write_text_atomic(root / "manifest.json", m.dump(2) + "\n");

    if (!ctx.quiet) {
      out_of(ctx) << "runs=" << records.size() << " all_converged=" << (all_converged ? "true" : "false")
                  << " K_emp=" << format_double(k_emp) << '\n';
    }
    return all_converged ? kExitOk : kExitSolver;
  });
}

int cmd_counterexample(double gamma, int dim, std::optional<double> q, const std::vector<double>& eps_list,
                       const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    c_constant(gamma, dim);
    const double qq = q.value_or(critical_q(gamma, dim));
    std::vector<double> eps = eps_list;
    if (eps.empty()) {
      for (int k = 4; k <= 9; ++k) eps.push_back(std::ldexp(1.0, -k));
    }
    const NormTable table = norm_table(gamma, dim, qq, eps, QuadratureOptions{}, ctx.threads);

    double residual = 0.0;
    for (double e : eps) {
      const RadialProfile prof = make_profile(gamma, dim, e);
      std::vector<double> r(1000);
      const double lo = std::log(e / 4.0), hi = std::log(0.49);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(lo + (hi - lo) * i / (r.size() - 1));
      residual = std::max(residual, radial_residual(prof, r));
    }

    std::optional<DivergenceFit> fit;
    std::string csv;
    std::vector<double> distinct = eps;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() >= 4) fit = divergence_fit(table);
    csv = norm_table_csv(table, fit ? &*fit : nullptr, residual);
    if (!fit) csv += "# fit skipped: fewer than 4 distinct eps\n";

    if (!ctx.out.empty()) write_text_atomic(output_file(ctx, ".", "counterexample.csv"), csv);
    if (!ctx.quiet) out_of(ctx) << csv;
    return kExitOk;
  });
}

int cmd_audit(const fs::path& solution_dir, const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    const StoredSolution stored = load_solution(solution_dir);
    const auto& problem = stored.problem;
    const auto& sol = stored.solution;
    const GridSpec& grid = sol.u.grid();
    const SpectrumWorkspace ws(grid);
    const Exponents exps = derive_exponents<double>(problem.H.gamma(), problem.q, grid.dim(), stored.delta);
    const double newton_tol = stored.settings.newton_tol;

    json checks = json::array();
    bool all = true;
    auto add = [&](const std::string& name, double value, double tol, bool passed, json extra = json::object()) {
      json c = {{"name", name}, {"value", finite_or_null(value)}, {"tolerance", tol}, {"passed", passed}};
      for (auto& [k, v] : extra.items()) c[k] = v;
      checks.push_back(c);
      all = all && passed;
    };

    add("converged", sol.residual_inf, newton_tol, sol.converged && sol.residual_inf <= newton_tol);
    const ScalarField res = residual_field(sol, problem, ws);
    const double res_inf = std::max(res.max_abs(), std::abs(sol.u.mean()));
    add("residual_inf", res_inf, 10.0 * newton_tol, res_inf <= 10.0 * newton_tol);
    const double ident = integral_identity_check(sol, problem, ws);
    add("integral_identity", ident, 10.0 * newton_tol, ident <= 10.0 * newton_tol);

    const PointwiseAudit pa = pointwise_audit(sol.u, exps, ws);
    const char* keys[] = {"g_root", "g_convexity", "cauchy_schwarz", "power_mean"};
    const auto audits = pa.all();
    for (std::size_t i = 0; i < audits.size(); ++i) {
      const InequalityAudit& a = *audits[i];
      add(std::string("pointwise_") + keys[i], a.max_signed_violation, 0.0, a.passed(),
          {{"inequality", a.name}, {"violations", a.violations}, {"evaluated", a.evaluated}});
    }

    const VectorField du = gradient(sol.u, ws);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = g_eval(du.norm_squared(i), exps.delta).g;
    std::sort(w.begin(), w.end());
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double k = std::max(1.0, w[static_cast<std::size_t>(p * static_cast<double>(w.size() - 1))]);
      const IbpResult ibp = ibp_identity_residual(sol, problem, exps, k, ws);
      add("ibp_identity", ibp.relative_gap, 1e-5, ibp.relative_gap <= 1e-5,
          {{"quantile", p}, {"k", k}, {"lhs", ibp.lhs}, {"rhs", ibp.rhs}});
    }

    const auto& H = problem.H;
    if (H.gamma() == 2.0 && H.c1() == 1.0 && H.is_pure_power()) {
      const double hc = hopf_cole_residual(sol, problem, ws);
      add("hopf_cole", hc, 1e-7, hc <= 1e-7);
    }

    json doc = {{"solution_dir", solution_dir.string()},
                {"exponents", exponents_json(exps)},
                {"checks", checks},
                {"passed", all}};
    write_text_atomic(output_file(ctx, solution_dir, "audit.json"), doc.dump(2) + "\n");
    if (!ctx.quiet) out_of(ctx) << doc.dump(2) << '\n';
    return all ? kExitOk : kExitSolver;
  });
}

int cmd_curve(const fs::path& solution_dir, const KGridSpec& spec, const std::vector<double>& k_values,
              std::optional<double> delta, const CommandContext& ctx) {
  return run_guarded(ctx, [&] {
    const StoredSolution stored = load_solution(solution_dir);
    const GridSpec& grid = stored.solution.u.grid();
    const SpectrumWorkspace ws(grid);
    const Exponents exps = derive_exponents<double>(stored.problem.H.gamma(), stored.problem.q, grid.dim(),
                                                    delta ? delta : stored.delta);
    const VectorField du = gradient(stored.solution.u, ws);
    const std::vector<double> k_grid =
        k_values.empty() ? default_k_grid(du, exps, spec.k_min, spec.k_max_factor, spec.count) : k_values;
    const SuperlevelCurve curve = superlevel_curve(du, exps, k_grid);
    const std::string csv = curve_csv(curve);
    write_text_atomic(output_file(ctx, solution_dir, "curve_custom.csv"), csv);
    if (!ctx.quiet) out_of(ctx) << csv;
    return kExitOk;
  });
}

}  // namespace hjlab
