#include "linctl/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json_emit.hpp"

#include "linctl/errors.hpp"
#include "linctl/lqr.hpp"
#include "linctl/lti.hpp"
#include "linctl/nonlinear.hpp"
#include "linctl/observability.hpp"
#include "linctl/reachability.hpp"
#include "linctl/stability.hpp"
#include "linctl/synthesis.hpp"

namespace linctl::cli {

namespace {

using detail::Json;
using detail::to_json;
namespace fs = std::filesystem;

struct Config {
  ToleranceConfig tol;
  Json polynomial_fields = Json::object();
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("failed writing " + path);
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

Matrix matrix_from_json(const Json& v, const char* key) {
  const std::string name(key);
  if (!v.is_array() || v.empty()) throw ParseError(name + " must be a non-empty nested array");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array()) throw ParseError(name + " must be an array of rows");
    if (i == 0) cols = v[i].size();
    if (v[i].size() != cols) throw ParseError(name + " is not rectangular");
  }
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Json& e = v[i][j];
      if (!e.is_number()) throw ParseError(name + " entries must be numbers");
      M(i, j) = e.get<double>();
    }
  }
  if (!M.allFinite()) throw ParseError(name + " entries must be finite");
  return M;
}

Config parse_config(const std::string& path) {
  const Json doc = parse_json(read_file(path), path);
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  Config cfg;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    const auto number = [&]() {
      if (!v.is_number()) throw ParseError("config field " + key + " must be a number");
      return v.get<double>();
    };
    if (key == "rank_rtol") cfg.tol.rank_rtol = number();
    else if (key == "residual_tol") cfg.tol.residual_tol = number();
    else if (key == "ode_step") cfg.tol.ode_step = number();
    else if (key == "fixed_point_tol") cfg.tol.fixed_point_tol = number();
    else if (key == "gramian_floor_factor") cfg.tol.gramian_floor_factor = number();
    else if (key == "max_iter") {
      if (!v.is_number_integer()) throw ParseError("config field max_iter must be an integer");
      cfg.tol.max_iter = v.get<int>();
    } else if (key == "polynomial_fields") {
      if (!v.is_object()) throw ParseError("polynomial_fields must be an object");
      cfg.polynomial_fields = v;
    } else {
      throw ParseError("unknown config field " + key);
    }
  }
  cfg.tol.validate();
  return cfg;
}

double parse_number(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (token.empty() || end != begin + token.size() || errno == ERANGE || !std::isfinite(value)) {
    throw ParseError("not a finite number: '" + token + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

Vector parse_vector(const std::string& text, int expected, const char* what) {
  const std::vector<std::string> parts = split(text);
  if (static_cast<int>(parts.size()) != expected) {
    throw DimensionError(std::string(what) + " needs " + std::to_string(expected) + " entries");
  }
  Vector v(expected);
  for (int i = 0; i < expected; ++i) v(i) = parse_number(parts[i]);
  return v;
}

// Accepts "a", "a+bi", "a-bj".
Complex parse_complex(std::string token) {
  if (token.empty()) throw ParseError("empty root");
  const char last = token.back();
  if (last != 'i' && last != 'j') return Complex(parse_number(token), 0.0);
  token.pop_back();
  std::size_t split_at = std::string::npos;
  for (std::size_t k = token.size(); k-- > 1;) {
    if ((token[k] == '+' || token[k] == '-') && token[k - 1] != 'e' && token[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  if (split_at == std::string::npos) return Complex(0.0, parse_number(token.empty() ? "1" : token));
  std::string imag = token.substr(split_at);
  if (imag == "+" || imag == "-") imag += "1";
  return Complex(parse_number(token.substr(0, split_at)), parse_number(imag));
}

MonicPolynomial target_polynomial(const std::string& poly, const std::string& roots, int n) {
  if (poly.empty() == roots.empty()) throw InputError("give exactly one of --poly and --roots");
  MonicPolynomial target;
  if (!poly.empty()) {
    const Vector alpha = parse_vector(poly, n, "--poly");
    target = MonicPolynomial::from_alpha(std::vector<double>(alpha.data(), alpha.data() + n));
  } else {
    ComplexList list;
    for (const std::string& t : split(roots)) list.push_back(parse_complex(t));
    if (static_cast<int>(list.size()) != n) {
      throw DimensionError("--roots needs " + std::to_string(n) + " entries");
    }
    target = MonicPolynomial::from_roots(list);
  }
  return target;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  return out.str();
}

Json error_json(const Error& e) {
  const char* category = e.category() == ErrorCategory::kInput          ? "input"
                         : e.category() == ErrorCategory::kPrecondition ? "precondition"
                                                                        : "numerical";
  return Json{{"name", e.name()}, {"category", category}, {"message", e.what()}};
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::kInput: return kExitInput;
    case ErrorCategory::kPrecondition: return kExitPrecondition;
    case ErrorCategory::kNumerical: return kExitNumerical;
  }
  return kExitInternal;
}

struct Options {
  std::string system;
  std::string dir;
  std::string config;
  std::string out;
  std::string report;
  std::string csv;
  std::string manifest;
  double horizon = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string x0;
  std::string x1;
  std::string u;
  std::string poly;
  std::string roots;
  std::string field = "pendulum";
  std::string xe;
  std::string ue;
  double lambda = 1.0;
  double delta = 0.1;
  double terminal_weight = 0.0;
  double mass = 1.0;
  double gravity = 1.0;
  int points = 1001;
};

struct Outcome {
  Json results = Json::object();
  Json verdicts = Json::object();
  std::optional<std::string> csv;  // trajectory payload
  std::optional<Error> failure;   // reported error that still carries results
};

Json analyze_system(const SystemFile& file, double horizon, const ToleranceConfig& tol,
                    Json& verdicts) {
  const LtiSystem& sys = file.system;
  Json r;
  r["name"] = file.name;
  r["dimensions"] = Json{{"n", sys.n()}, {"p", sys.p()}, {"m", sys.m()}};

  const ControllabilityReport ctrl = kalman_test(sys, tol);
  const GramianReport gram = controllability_gramian(sys, 0.0, horizon, tol);
  r["controllability"] = Json{{"kalman_rank", ctrl.rank},
                              {"controllable", ctrl.controllable},
                              {"gramian_horizon", horizon},
                              {"gramian_min_eigenvalue", gram.min_eigenvalue},
                              {"gramian_invertible", gram.invertible}};
  if (gram.invertible != ctrl.controllable) {
    throw NumericalInconsistencyError("Kalman rank and controllability Gramian disagree");
  }

  const HautusReport hautus = hautus_test(sys, tol);
  Json records = Json::array();
  for (const HautusRecord& rec : hautus.records) {
    records.push_back(Json{{"eigenvalue", to_json(rec.eigenvalue)}, {"rank", rec.rank}, {"pass", rec.pass}});
  }
  r["hautus"] = Json{{"pass", hautus.pass}, {"records", records}};
  if (hautus.pass != ctrl.controllable) {
    throw NumericalInconsistencyError("Kalman rank and Hautus test disagree");
  }

  const ObservabilityReport obs = observability_test(sys.A(), sys.C(), horizon, tol);
  r["observability"] = Json{{"rank", obs.rank},
                            {"observable", obs.observable},
                            {"gramian_min_eigenvalue", obs.gramian.min_eigenvalue}};

  const StabilityReport stab = stability_report(sys.A());
  r["stability"] = Json{{"spectral_abscissa", stab.omega},
                        {"stable", stab.stable},
                        {"marginal", stab.marginal},
                        {"eigenvalues", to_json(sorted_spectrum(eigenvalues(sys.A())))}};
  const bool stabilizable = is_stabilizable(sys.A(), sys.B(), tol);
  const DetectabilityReport det = detectability_test(sys.A(), sys.C(), tol);
  r["stabilizable"] = stabilizable;
  r["detectable"] = det.detectable;

  verdicts["controllable"] = ctrl.controllable;
  verdicts["observable"] = obs.observable;
  verdicts["stable"] = stab.stable;
  verdicts["stabilizable"] = stabilizable;
  verdicts["detectable"] = det.detectable;
  return r;
}

Outcome run_analyze_dir(const Options& o, const Config& cfg, int& code) {
  if (!fs::is_directory(o.dir)) throw InputError("not a directory: " + o.dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Item {
    Json json;
    int code = kExitOk;
  };
  std::vector<std::future<Item>> jobs;
  for (const fs::path& path : files) {
    jobs.push_back(std::async(std::launch::async, [path, &o, &cfg]() {
      Item item;
      item.json["file"] = path.filename().string();
      try {
        Json verdicts = Json::object();
        item.json["results"] = analyze_system(load_system_file(path.string()), o.horizon, cfg.tol, verdicts);
        item.json["verdicts"] = verdicts;
      } catch (const Error& e) {
        item.json["error"] = error_json(e);
        item.code = exit_code_for(e);
      }
      return item;
    }));
  }
  Outcome outcome;
  Json list = Json::array();
  code = kExitOk;
  int failures = 0;
  for (auto& job : jobs) {
    Item item = job.get();
    if (item.code != kExitOk) {
      ++failures;
      if (code == kExitOk) code = item.code;
    }
    list.push_back(std::move(item.json));
  }
  outcome.results["files"] = list;
  outcome.verdicts["files"] = static_cast<int>(files.size());
  outcome.verdicts["failures"] = failures;
  return outcome;
}

VectorField field_by_name(const Options& o, const Config& cfg, Vector& xe, Vector& ue) {
  if (o.field == "pendulum") {
    xe = Vector(2);
    xe << std::numbers::pi, 0.0;
    ue = Vector::Zero(1);
    return pendulum_field(o.mass, o.gravity);
  }
  if (o.field == "double-integrator") {
    xe = Vector::Zero(2);
    ue = Vector::Zero(1);
    return double_integrator_field();
  }
  if (!cfg.polynomial_fields.contains(o.field)) {
    throw InputError("unknown vector field '" + o.field + "'");
  }
  const Json& spec = cfg.polynomial_fields.at(o.field);
  try {
    const int n = spec.at("n").get<int>();
    const int p = spec.at("p").get<int>();
    std::vector<PolynomialTerm> terms;
    for (const Json& t : spec.at("terms")) {
      PolynomialTerm term;
      term.component = t.at("component").get<int>();
      term.coeff = t.at("coeff").get<double>();
      if (t.contains("x_powers")) term.x_powers = t.at("x_powers").get<std::vector<int>>();
      if (t.contains("u_powers")) term.u_powers = t.at("u_powers").get<std::vector<int>>();
      terms.push_back(std::move(term));
    }
    xe = Vector::Zero(n);
    ue = Vector::Zero(p);
    return polynomial_field(n, p, std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("polynomial field '" + o.field + "': " + e.what());
  }
}

Outcome execute(const std::string& command, const Options& o, const Config& cfg, int& code) {
  const ToleranceConfig& tol = cfg.tol;
  Outcome outcome;
  code = kExitOk;
  if (command == "analyze" && !o.dir.empty()) return run_analyze_dir(o, cfg, code);

  if (command == "steer-nl") {
    Vector xe, ue;
    const VectorField vf = field_by_name(o, cfg, xe, ue);
    if (!o.xe.empty()) xe = parse_vector(o.xe, vf.n(), "--xe");
    if (!o.ue.empty()) ue = parse_vector(o.ue, vf.p(), "--ue");
    const Vector x0 = parse_vector(o.x0, vf.n(), "--x0");
    const Vector x1 = parse_vector(o.x1, vf.n(), "--x1");
    const ReferenceTrajectory ref = ReferenceTrajectory::equilibrium(vf, xe, ue, o.t0, o.t1);
    SteeringOptions opts;
    opts.trust_radius = o.delta;
    const SteeringResult res = steer_nonlinear(vf, ref, x0, x1, tol, opts);
    Json history = Json::array();
    for (double e : res.error_history) history.push_back(e);
    outcome.results = Json{{"field", o.field},
                           {"iterations", res.iterations},
                           {"converged", res.converged},
                           {"terminal_error", res.terminal_error},
                           {"error_history", history},
                           {"max_control_deviation", res.max_control_deviation},
                           {"terminal_state", to_json(res.trajectory.final_state())}};
    outcome.verdicts["converged"] = res.converged;
    outcome.csv = trajectory_csv(res.trajectory);
    if (!res.converged) outcome.failure = ConvergenceError("fixed-point iteration hit max_iter");
    return outcome;
  }

  if (o.system.empty()) throw InputError(command + " needs a system file");
  const SystemFile file = load_system_file(o.system);
  const LtiSystem& sys = file.system;

  if (command == "analyze") {
    outcome.results = analyze_system(file, o.horizon, tol, outcome.verdicts);
  } else if (command == "gramian") {
    const GramianReport g = controllability_gramian(sys, o.t0, o.t1, tol);
    outcome.results = Json{{"t0", g.t0},
                           {"t1", g.t1},
                           {"gramian", to_json(g.gramian)},
                           {"min_eigenvalue", g.min_eigenvalue},
                           {"max_eigenvalue", g.max_eigenvalue},
                           {"invertible", g.invertible}};
    outcome.verdicts["invertible"] = g.invertible;
  } else if (command == "steer") {
    const Vector x0 = parse_vector(o.x0, sys.n(), "--x0");
    const Vector x1 = parse_vector(o.x1, sys.n(), "--x1");
    if (o.points < 2) throw InputError("--points must be at least 2");
    const MinEnergyControl mec = min_energy_control(sys, o.t0, o.t1, x0, x1, tol);
    const std::vector<double> grid = uniform_grid(o.t0, o.t1, o.points);
    const Trajectory traj = simulate(sys, x0, mec.control, grid, tol);
    outcome.results = Json{{"predicted_cost", mec.predicted_cost},
                           {"terminal_state", to_json(traj.final_state())},
                           {"endpoint_error", (traj.final_state() - x1).norm()},
                           {"gramian_min_eigenvalue", mec.gramian.min_eigenvalue}};
    outcome.csv = trajectory_csv(traj);
  } else if (command == "place") {
    const FeedbackGain gain = pole_place(sys.A(), sys.B(), target_polynomial(o.poly, o.roots, sys.n()), tol);
    outcome.results = Json{{"F", to_json(gain.F)},
                           {"achieved_spectrum", to_json(sorted_spectrum(gain.achieved_spectrum))},
                           {"residual", gain.residual}};
  } else if (command == "observer") {
    const ObserverGain gain =
        design_observer(sys.A(), sys.C(), target_polynomial(o.poly, o.roots, sys.n()), tol);
    outcome.results = Json{{"L", to_json(gain.L)}, {"closed_loop_abscissa", gain.closed_loop_abscissa}};
  } else if (command == "lqr") {
    const Vector xi = o.x0.empty() ? Vector(Vector::Zero(sys.n())) : parse_vector(o.x0, sys.n(), "--x0");
    const LqrProblem prob(sys, o.terminal_weight * Matrix::Identity(sys.n(), sys.n()), o.horizon);
    const RiccatiSolution sol = riccati_finite(prob, tol);
    const LqrTrajectory lt = lqr_trajectory(prob, sol, xi, {}, tol);
    const Matrix P0 = sol.samples().front();
    outcome.results = Json{{"horizon", o.horizon},
                           {"P_initial", to_json(P0)},
                           {"max_residual", sol.max_residual},
                           {"cost", lt.cost},
                           {"value", xi.dot(P0 * xi)},
                           {"terminal_state", to_json(lt.trajectory.final_state())}};
    outcome.csv = trajectory_csv(lt.trajectory);
  } else if (command == "are") {
    const AreSolution are = are_solve(sys, tol);
    outcome.results = Json{{"P", to_json(are.P)},
                           {"K", to_json(Matrix(-sys.B().transpose() * are.P))},
                           {"residual", are.residual},
                           {"closed_loop_abscissa", are.closed_loop_abscissa},
                           {"horizon_used", are.horizon_used}};
  } else if (command == "gramian-stab") {
    const GramianStabilizer gs = gramian_stabilizer(sys.A(), sys.B(), o.lambda, tol);
    outcome.results = Json{{"lambda", gs.lambda},
                           {"Q", to_json(gs.Q)},
                           {"P", to_json(gs.P)},
                           {"K", to_json(gs.K)},
                           {"riccati_residual", gs.riccati_residual},
                           {"closed_loop_abscissa", gs.closed_loop_abscissa},
                           {"min_admissible_lambda", gs.min_admissible_lambda}};
  } else if (command == "simulate") {
    const Vector x0 = parse_vector(o.x0, sys.n(), "--x0");
    const Vector u = o.u.empty() ? Vector(Vector::Zero(sys.p())) : parse_vector(o.u, sys.p(), "--u");
    if (o.points < 2) throw InputError("--points must be at least 2");
    if (!(o.t0 < o.t1)) throw DomainError("simulation interval must satisfy t0 < t1");
    const Trajectory traj =
        simulate(sys, x0, ControlSignal::constant(u, o.t0, o.t1), uniform_grid(o.t0, o.t1, o.points), tol);
    outcome.results = Json{{"terminal_state", to_json(traj.final_state())}};
    outcome.csv = trajectory_csv(traj);
  }
  return outcome;
}

bool is_trajectory_command(const std::string& command) {
  return command == "steer" || command == "simulate" || command == "steer-nl";
}

}  // namespace

SystemFile parse_system_text(const std::string& text, const std::string& fallback_name) {
  const Json doc = parse_json(text, fallback_name);
  if (!doc.is_object()) throw ParseError("system file must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "name" && key != "A" && key != "B" && key != "C" && key != "metadata") {
      throw ParseError("unknown system file key '" + key + "'");
    }
  }
  if (!doc.contains("A") || !doc.contains("B")) throw ParseError("system file needs A and B");
  std::string name = fallback_name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("name must be a string");
    name = doc["name"].get<std::string>();
  }
  if (doc.contains("metadata") && !doc["metadata"].is_object()) {
    throw ParseError("metadata must be an object");
  }
  const Matrix A = matrix_from_json(doc["A"], "A");
  const Matrix B = matrix_from_json(doc["B"], "B");
  std::optional<Matrix> C;
  if (doc.contains("C")) C = matrix_from_json(doc["C"], "C");
  return SystemFile{name, LtiSystem(A, B, C), C.has_value()};
}

SystemFile load_system_file(const std::string& path) {
  return parse_system_text(read_file(path), fs::path(path).stem().string());
}

ToleranceConfig load_config_file(const std::string& path) { return parse_config(path).tol; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear control analysis and synthesis"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&o](CLI::App* sub, bool trajectory) {
    sub->add_option("--config", o.config, "Tolerance configuration (JSON)");
    sub->add_option("--manifest", o.manifest, "Write a run manifest (JSON)");
    if (trajectory) {
      sub->add_option("--out", o.out, "Trajectory CSV (default: stdout)");
      sub->add_option("--report", o.report, "JSON report");
    } else {
      sub->add_option("--out", o.out, "JSON report (default: stdout)");
    }
  };
  const auto system_arg = [&o](CLI::App* sub) {
    sub->add_option("system", o.system, "System file (JSON)")->required();
  };
  const auto target_args = [&o](CLI::App* sub) {
    sub->add_option("--poly", o.poly, "Target alpha_1,...,alpha_n of s^n - alpha_n s^{n-1} - ... - alpha_1");
    sub->add_option("--roots", o.roots, "Target roots, e.g. -1,-2+1i,-2-1i");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Controllability, observability and stability report");
  analyze->add_option("system", o.system, "System file (JSON)");
  analyze->add_option("--dir", o.dir, "Analyze every *.json file in a directory");
  analyze->add_option("--horizon", o.horizon, "Gramian horizon")->check(CLI::PositiveNumber);
  common(analyze, false);

  CLI::App* gramian = app.add_subcommand("gramian", "Controllability Gramian on [t0, t1]");
  system_arg(gramian);
  gramian->add_option("--t0", o.t0);
  gramian->add_option("--t1", o.t1);
  common(gramian, false);

  CLI::App* steer = app.add_subcommand("steer", "Minimum-energy steering (CSV trajectory)");
  system_arg(steer);
  steer->add_option("--t0", o.t0);
  steer->add_option("--t1", o.t1);
  steer->add_option("--x0", o.x0)->required();
  steer->add_option("--x1", o.x1)->required();
  steer->add_option("--points", o.points, "Output grid size");
  common(steer, true);

  CLI::App* place = app.add_subcommand("place", "Pole placement");
  system_arg(place);
  target_args(place);
  common(place, false);

  CLI::App* observer = app.add_subcommand("observer", "Luenberger observer gain");
  system_arg(observer);
  target_args(observer);
  common(observer, false);

  CLI::App* lqr = app.add_subcommand("lqr", "Finite-horizon LQR");
  system_arg(lqr);
  lqr->add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
  lqr->add_option("--x0", o.x0);
  lqr->add_option("--terminal-weight", o.terminal_weight, "P0 = w I")->check(CLI::NonNegativeNumber);
  lqr->add_option("--csv", o.csv, "Optimal trajectory CSV");
  common(lqr, false);

  CLI::App* are = app.add_subcommand("are", "Algebraic Riccati equation");
  system_arg(are);
  common(are, false);

  CLI::App* gstab = app.add_subcommand("gramian-stab", "Gramian stabilizer with decay rate lambda");
  system_arg(gstab);
  gstab->add_option("--lambda", o.lambda)->check(CLI::PositiveNumber);
  common(gstab, false);

  CLI::App* sim = app.add_subcommand("simulate", "Simulate under a constant input (CSV trajectory)");
  system_arg(sim);
  sim->add_option("--t0", o.t0);
  sim->add_option("--t1", o.t1);
  sim->add_option("--x0", o.x0)->required();
  sim->add_option("--u", o.u, "Constant input");
  sim->add_option("--points", o.points, "Output grid size");
  common(sim, true);

  CLI::App* snl = app.add_subcommand("steer-nl", "Local nonlinear steering near an equilibrium");
  snl->add_option("--field", o.field, "pendulum, double-integrator or a polynomial field from --config");
  snl->add_option("--t0", o.t0);
  snl->add_option("--t1", o.t1);
  snl->add_option("--x0", o.x0)->required();
  snl->add_option("--x1", o.x1)->required();
  snl->add_option("--xe", o.xe, "Equilibrium state");
  snl->add_option("--ue", o.ue, "Equilibrium input");
  snl->add_option("--delta", o.delta, "Trust radius")->check(CLI::PositiveNumber);
  snl->add_option("--mass", o.mass)->check(CLI::PositiveNumber);
  snl->add_option("--gravity", o.gravity);
  common(snl, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ParseError: " << e.what() << "\n";
    return kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const bool trajectory = is_trajectory_command(command);

  Json parameters = Json::object();
  {
    std::map<std::string, std::string> sorted;
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      std::string joined;
      for (const std::string& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      sorted[opt->get_name()] = joined;
    }
    for (const auto& [k, v] : sorted) parameters[k] = v;
  }

  int code = kExitOk;
  Outcome outcome;
  Json errors = Json::array();
  try {
    Config cfg;
    if (!o.config.empty()) cfg = parse_config(o.config);
    outcome = execute(command, o, cfg, code);
    if (outcome.failure) {
      errors.push_back(error_json(*outcome.failure));
      code = exit_code_for(*outcome.failure);
    }
  } catch (const Error& e) {
    errors.push_back(error_json(e));
    code = exit_code_for(e);
    err << e.name() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    errors.push_back(Json{{"name", "InternalError"}, {"category", "internal"}, {"message", e.what()}});
    code = kExitInternal;
    err << "InternalError: " << e.what() << "\n";
  }

  Json report;
  report["command"] = command;
  report["inputs"] = Json{{"system", o.system.empty() ? Json(nullptr) : Json(o.system)},
                          {"parameters", parameters}};
  report["results"] = outcome.results;
  report["errors"] = errors;
  const std::string report_text = detail::emit_json(report);

  std::vector<std::string> outputs;
  try {
    if (trajectory) {
      if (outcome.csv) {
        if (o.out.empty()) {
          out << *outcome.csv;
        } else {
          write_file(o.out, *outcome.csv);
          outputs.push_back(o.out);
        }
      }
      if (!o.report.empty()) {
        write_file(o.report, report_text);
        outputs.push_back(o.report);
      } else if (code != kExitOk && !outcome.csv) {
        out << report_text;
      }
    } else {
      if (o.out.empty()) {
        out << report_text;
      } else {
        write_file(o.out, report_text);
        outputs.push_back(o.out);
      }
      if (!o.csv.empty() && outcome.csv) {
        write_file(o.csv, *outcome.csv);
        outputs.push_back(o.csv);
      }
    }
    if (!o.manifest.empty()) {
      Json verdicts = outcome.verdicts;
      verdicts["exit_code"] = code;
      verdicts["error"] = errors.empty() ? Json(nullptr) : errors[0]["name"];
      Json manifest;
      manifest["command"] = command;
      manifest["parameters"] = parameters;
      Json listed = Json::array();
      for (const std::string& path : outputs) listed.push_back(path);
      manifest["outputs"] = listed;
      manifest["verdicts"] = verdicts;
      write_file(o.manifest, detail::emit_json(manifest));
    }
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return kExitInput;
  }
  return code;
}

}  // namespace linctl::cli
