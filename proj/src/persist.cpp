#include "hjlab/persist.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjlab/field_io.hpp"
#include "hjlab/format.hpp"

namespace hjlab {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void save_solution(const fs::path& dir, const ErgodicSolution& sol, const ErgodicProblem& problem,
                   const SolveSettings& settings, std::optional<double> delta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_field(dir / "u.field", sol.u);
  write_field(dir / "f.field", problem.f);

  json doc;
  doc["gamma"] = problem.H.gamma();
  doc["c1"] = problem.H.c1();
  if (const auto& b = problem.H.perturbation()) {
    doc["perturbation"] = {{"type", b->name}, {"amplitude", b->bound}};
  } else {
    doc["perturbation"] = nullptr;
  }
  doc["q"] = problem.q;
  doc["delta"] = delta ? json(*delta) : json("auto");
  doc["lambda"] = sol.lambda;
  doc["residual_inf"] = sol.residual_inf;
  doc["residual_l2"] = sol.residual_l2;
  doc["steps"] = {{"relax", sol.relax_steps}, {"newton", sol.newton_steps}};
  doc["converged"] = sol.converged;
  doc["settings"] = {{"relax_dt", settings.relax_dt},
                     {"relax_tol", settings.relax_tol},
                     {"newton_tol", settings.newton_tol},
                     {"linear_tol", settings.linear_tol},
                     {"max_relax_steps", settings.max_relax_steps},
                     {"max_newton_steps", settings.max_newton_steps},
                     {"max_linear_iterations", settings.max_linear_iterations},
                     {"gmres_restart", settings.gmres_restart}};
  doc["grid"] = {{"d", sol.u.grid().dim()}, {"n", sol.u.grid().n()}};
  write_text_atomic(dir / "solution.json", doc.dump(2) + "\n");
}

StoredSolution load_solution(const fs::path& dir) {
  const std::string text = read_text(dir / "solution.json");
  try {
    const json doc = json::parse(text);
    ScalarField u = read_field(dir / "u.field");
    ScalarField f = read_field(dir / "f.field");
    const GridSpec grid(doc.at("grid").at("d").get<int>(), doc.at("grid").at("n").get<int>());
    if (!(u.grid() == grid) || !(f.grid() == grid)) throw IoError("field grids disagree with solution.json");

    const double gamma = doc.at("gamma").get<double>();
    const double c1 = doc.at("c1").get<double>();
    const json& pert = doc.at("perturbation");
    Hamiltonian H = pert.is_null() ? Hamiltonian(gamma, c1)
                                   : Hamiltonian(gamma, c1, cosine_perturbation(pert.at("amplitude").get<double>()));

    SolveSettings settings;
    const json& s = doc.at("settings");
    settings.relax_dt = s.at("relax_dt").get<double>();
    settings.relax_tol = s.at("relax_tol").get<double>();
    settings.newton_tol = s.at("newton_tol").get<double>();
    settings.linear_tol = s.at("linear_tol").get<double>();
    settings.max_relax_steps = s.at("max_relax_steps").get<std::size_t>();
    settings.max_newton_steps = s.at("max_newton_steps").get<std::size_t>();
    settings.max_linear_iterations = s.at("max_linear_iterations").get<std::size_t>();
    settings.gmres_restart = s.at("gmres_restart").get<std::size_t>();

    ErgodicSolution sol{std::move(u)};
    sol.lambda = doc.at("lambda").get<double>();
    sol.residual_inf = doc.at("residual_inf").get<double>();
    sol.residual_l2 = doc.at("residual_l2").get<double>();
    sol.relax_steps = doc.at("steps").at("relax").get<std::size_t>();
    sol.newton_steps = doc.at("steps").at("newton").get<std::size_t>();
    sol.converged = doc.at("converged").get<bool>();

    std::optional<double> delta;
    if (doc.at("delta").is_number()) delta = doc.at("delta").get<double>();
    return StoredSolution{ErgodicProblem{std::move(f), std::move(H), doc.at("q").get<double>()}, std::move(sol),
                          settings, delta};
  } catch (const json::exception& e) {
    throw IoError("malformed " + (dir / "solution.json").string() + ": " + e.what());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError("inconsistent solution in " + dir.string() + ": " + e.what());
  }
}

std::string curve_csv(const SuperlevelCurve& curve) {
  std::ostringstream os;
  os << "k,Y_k,omega_arg,excess\n";
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    os << format_double(curve.k[i]) << ',' << format_double(curve.y[i]) << ',' << format_double(curve.omega_arg[i])
       << ',' << format_double(curve.excess(i)) << '\n';
  }
  return os.str();
}

std::string envelope_csv(const OmegaEnvelope& env) {
  std::ostringstream os;
  os << "t,excess\n";
  for (std::size_t i = 0; i < env.t.size(); ++i) os << format_double(env.t[i]) << ',' << format_double(env.e[i]) << '\n';
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      if (cell == "true") {
        row.push_back(1.0);
      } else if (cell == "false") {
        row.push_back(0.0);
      } else {
        double v = 0.0;
        const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || end != cell.data() + cell.size()) throw IoError("bad CSV cell '" + cell + "'");
        row.push_back(v);
      }
    }
    if (row.size() != table.header.size()) throw IoError("CSV row width differs from header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hjlab
