#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hjlab/hamiltonian.hpp"
#include "hjlab/solver.hpp"

namespace hjlab {

struct KGridSpec {
  double k_min = 1.0;
  double k_max_factor = 1.05;
  std::size_t count = 64;
};

struct PerturbationSpec {
  std::string type = "cosine";
  double amplitude = 0.0;
};

/// Experiment description. Parsed from JSON with every key checked; unknown
/// keys and out-of-range values raise ConfigurationError.
struct RunConfig {
  int dimension = 2;
  int grid_n = 64;
  double gamma = 2.0;
  double q = 4.0;
  std::optional<double> delta;  // nullopt means "auto"
  double M_target = 1.0;
  std::size_t ensemble_size = 1;
  std::uint64_t seed = 0;
  int band_limit = 4;
  SolveSettings solver;
  KGridSpec k_grid;
  std::string output_dir = "hjlab_out";
  bool manufactured = false;
  double c1 = 1.0;
  std::optional<PerturbationSpec> perturbation;

  Hamiltonian hamiltonian() const;
};

RunConfig parse_config(const std::string& json_text);
/// Throws IoError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, every field present); parse_config round-trips it.
std::string config_to_json(const RunConfig& cfg);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace hjlab
