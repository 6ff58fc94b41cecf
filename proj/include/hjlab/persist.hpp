#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/bernstein.hpp"
#include "hjlab/solver.hpp"

namespace hjlab {

/// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Solution directory: u.field, f.field and solution.json.
void save_solution(const std::filesystem::path& dir, const ErgodicSolution& sol, const ErgodicProblem& problem,
                   const SolveSettings& settings, std::optional<double> delta = std::nullopt);

struct StoredSolution {
  ErgodicProblem problem;
  ErgodicSolution solution;
  SolveSettings settings;
  std::optional<double> delta;
};

/// Throws IoError on missing or malformed files.
StoredSolution load_solution(const std::filesystem::path& dir);

/// Columns k, Y_k, omega_arg, excess at 17 significant digits.
std::string curve_csv(const SuperlevelCurve& curve);
/// Columns t, excess.
std::string envelope_csv(const OmegaEnvelope& env);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;  // lines starting with '#', without the marker
};

/// Numeric CSV reader: first non-comment line is the header; "true"/"false" map to 1/0.
CsvTable parse_csv(const std::string& text);

}  // namespace hjlab
