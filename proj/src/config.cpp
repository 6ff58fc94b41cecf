#include "hjlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hjlab/grid.hpp"

namespace hjlab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigurationError("unknown key '" + key + "' in " + where);
  }
}

double get_real(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigurationError(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigurationError(std::string("'") + key + "' must be finite");
  return x;
}

long long get_int(const json& obj, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigurationError(std::string("'") + key + "' must be an integer");
  return v.get<long long>();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigurationError(message);
}

SolveSettings parse_solver(const json& obj) {
  require(obj.is_object(), "'solver' must be an object");
  reject_unknown(obj,
                 {"relax_dt", "relax_tol", "newton_tol", "linear_tol", "max_relax_steps", "max_newton_steps",
                  "max_linear_iterations", "gmres_restart"},
                 "solver");
  SolveSettings s;
  s.relax_dt = get_real(obj, "relax_dt", s.relax_dt);
  s.relax_tol = get_real(obj, "relax_tol", s.relax_tol);
  s.newton_tol = get_real(obj, "newton_tol", s.newton_tol);
  s.linear_tol = get_real(obj, "linear_tol", s.linear_tol);
  const auto cap = [&](const char* key, std::size_t fallback) {
    const long long v = get_int(obj, key, static_cast<long long>(fallback));
    require(v >= 1, std::string("solver.") + key + " must be >= 1");
    return static_cast<std::size_t>(v);
  };
  s.max_relax_steps = cap("max_relax_steps", s.max_relax_steps);
  s.max_newton_steps = cap("max_newton_steps", s.max_newton_steps);
  s.max_linear_iterations = cap("max_linear_iterations", s.max_linear_iterations);
  s.gmres_restart = cap("gmres_restart", s.gmres_restart);
  s.validate();
  return s;
}

}  // namespace

Hamiltonian RunConfig::hamiltonian() const {
  if (!perturbation) return Hamiltonian(gamma, c1);
  return Hamiltonian(gamma, c1, cosine_perturbation(perturbation->amplitude));
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), "config must be a JSON object");
  reject_unknown(doc,
                 {"dimension", "grid_n", "gamma", "q", "delta", "M_target", "ensemble_size", "seed", "band_limit",
                  "solver", "k_grid", "output_dir", "manufactured", "c1", "perturbation"},
                 "config");

  RunConfig cfg;
  cfg.dimension = static_cast<int>(get_int(doc, "dimension", cfg.dimension));
  require(cfg.dimension >= 1 && cfg.dimension <= 3, "dimension must be 1, 2 or 3");
  const long long n = get_int(doc, "grid_n", cfg.grid_n);
  require(n >= 8 && n <= (1 << 20) && is_power_of_two(static_cast<int>(n)), "grid_n must be a power of two >= 8");
  cfg.grid_n = static_cast<int>(n);
  cfg.gamma = get_real(doc, "gamma", cfg.gamma);
  require(cfg.gamma > 1.0, "gamma must exceed 1");
  cfg.q = get_real(doc, "q", cfg.q);
  require(cfg.q >= 1.0, "q must be >= 1");

  if (doc.contains("delta")) {
    const json& d = doc.at("delta");
    if (d.is_string()) {
      require(d.get<std::string>() == "auto", "delta must be \"auto\" or a number");
    } else {
      const double delta = get_real(doc, "delta", 0.0);
      require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
      cfg.delta = delta;
    }
  }

  cfg.M_target = get_real(doc, "M_target", cfg.M_target);
  require(cfg.M_target >= 0.0, "M_target must be nonnegative");
  const long long ens = get_int(doc, "ensemble_size", static_cast<long long>(cfg.ensemble_size));
  require(ens >= 1, "ensemble_size must be >= 1");
  cfg.ensemble_size = static_cast<std::size_t>(ens);
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0),
            "seed must be an unsigned 64-bit integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  const long long band = get_int(doc, "band_limit", cfg.band_limit);
  require(band >= 0, "band_limit must be nonnegative");
  require(band < cfg.grid_n / 4, "band_limit must be below grid_n/4 so the source is resolved");
  cfg.band_limit = static_cast<int>(band);

  if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));

  if (doc.contains("k_grid")) {
    const json& kg = doc.at("k_grid");
    require(kg.is_object(), "'k_grid' must be an object");
    reject_unknown(kg, {"k_min", "k_max_factor", "count"}, "k_grid");
    cfg.k_grid.k_min = get_real(kg, "k_min", cfg.k_grid.k_min);
    cfg.k_grid.k_max_factor = get_real(kg, "k_max_factor", cfg.k_grid.k_max_factor);
    const long long count = get_int(kg, "count", static_cast<long long>(cfg.k_grid.count));
    require(cfg.k_grid.k_min >= 1.0, "k_grid.k_min must be >= 1");
    require(cfg.k_grid.k_max_factor > 1.0, "k_grid.k_max_factor must exceed 1");
    require(count >= 2, "k_grid.count must be >= 2");
    cfg.k_grid.count = static_cast<std::size_t>(count);
  }

  if (doc.contains("output_dir")) {
    require(doc.at("output_dir").is_string(), "output_dir must be a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
    require(!cfg.output_dir.empty(), "output_dir must not be empty");
  }
  if (doc.contains("manufactured")) {
    require(doc.at("manufactured").is_boolean(), "manufactured must be a boolean");
    cfg.manufactured = doc.at("manufactured").get<bool>();
  }
  cfg.c1 = get_real(doc, "c1", cfg.c1);
  require(cfg.c1 > 0.0, "c1 must be positive");

  if (doc.contains("perturbation") && !doc.at("perturbation").is_null()) {
    const json& p = doc.at("perturbation");
    require(p.is_object(), "'perturbation' must be an object or null");
    reject_unknown(p, {"type", "amplitude"}, "perturbation");
    PerturbationSpec spec;
    if (p.contains("type")) {
      require(p.at("type").is_string() && p.at("type").get<std::string>() == "cosine",
              "perturbation.type must be \"cosine\"");
    }
    spec.amplitude = get_real(p, "amplitude", spec.amplitude);
    require(spec.amplitude >= 0.0, "perturbation.amplitude must be nonnegative");
    cfg.perturbation = spec;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["dimension"] = cfg.dimension;
  doc["grid_n"] = cfg.grid_n;
  doc["gamma"] = cfg.gamma;
  doc["q"] = cfg.q;
  if (cfg.delta) {
    doc["delta"] = *cfg.delta;
  } else {
    doc["delta"] = "auto";
  }
  doc["M_target"] = cfg.M_target;
  doc["ensemble_size"] = cfg.ensemble_size;
  doc["seed"] = cfg.seed;
  doc["band_limit"] = cfg.band_limit;
  doc["solver"] = {{"relax_dt", cfg.solver.relax_dt},
                   {"relax_tol", cfg.solver.relax_tol},
                   {"newton_tol", cfg.solver.newton_tol},
                   {"linear_tol", cfg.solver.linear_tol},
                   {"max_relax_steps", cfg.solver.max_relax_steps},
                   {"max_newton_steps", cfg.solver.max_newton_steps},
                   {"max_linear_iterations", cfg.solver.max_linear_iterations},
                   {"gmres_restart", cfg.solver.gmres_restart}};
  doc["k_grid"] = {{"k_min", cfg.k_grid.k_min}, {"k_max_factor", cfg.k_grid.k_max_factor}, {"count", cfg.k_grid.count}};
  doc["output_dir"] = cfg.output_dir;
  doc["manufactured"] = cfg.manufactured;
  doc["c1"] = cfg.c1;
  if (cfg.perturbation) {
    doc["perturbation"] = {{"type", cfg.perturbation->type}, {"amplitude", cfg.perturbation->amplitude}};
  } else {
    doc["perturbation"] = nullptr;
  }
  return doc.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hjlab
