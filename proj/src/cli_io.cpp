#include "madd/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "madd/checks.hpp"
#include "madd/errors.hpp"
#include "madd/sections.hpp"
#include "madd/transforms.hpp"

namespace madd {

namespace {

using nlohmann::json;

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw SpecError(where + " must be an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw SpecError("missing field '" + std::string(name) + "' in " + where);
  return *it;
}

std::int64_t integer_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number_integer()) throw SpecError("field '" + std::string(name) + "' in " + where + " must be an integer");
  return v.get<std::int64_t>();
}

std::string vec(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? " " : "") + format_real(v[k]);
  return s;
}

std::string mat(const Eigen::MatrixXd& m) {
  std::string s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) s += "; ";
    s += vec(m.row(r).transpose());
  }
  return s;
}

std::string flag(bool b) { return b ? "true" : "false"; }

Eigen::VectorXd direction_of(const Command& cmd, int d) {
  if (static_cast<int>(cmd.u.size()) != d) throw PreconditionError("--u needs exactly d components");
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(cmd.u.data(), d);
  if (u.norm() == 0.0) throw PreconditionError("--u must be nonzero");
  // Accept non-normalized input and normalize it exactly once.
  return u.normalized();
}

LatticeVector target_of(const Command& cmd, int d) {
  if (static_cast<int>(cmd.x.size()) != d) throw PreconditionError("--x needs exactly d integer components");
  return LatticeVector(cmd.x);
}

void emit_table(RunReport& report, const Command& cmd, const std::string& csv) {
  if (cmd.output.empty()) {
    report.table = csv;
    return;
  }
  std::ofstream f(cmd.output, std::ios::binary);
  if (!f) throw ResourceError("cannot open output file '" + cmd.output + "'");
  f << csv;
  report.csv_paths.push_back(cmd.output);
}

void verb_validate(const ProcessSpec& spec, RunReport& r) {
  const ValidationReport v = validate(spec);
  r.outputs = {{"rows_stochastic", flag(v.rows_stochastic)},
               {"markov_irreducible", flag(v.markov_irreducible)},
               {"full_chain_irreducible", flag(v.full_chain_irreducible)},
               {"aperiodic", flag(v.aperiodic)},
               {"non_centered", flag(v.non_centered)},
               {"displacement_lattice_index", std::to_string(v.displacement_lattice_index)},
               {"displacement_cone_full", flag(v.displacement_cone_full)},
               {"period", std::to_string(v.period)},
               {"cycles_enumerated", std::to_string(v.cycles_enumerated)},
               {"spectral_scan_max", format_real(v.spectral_scan_max)},
               {"global_drift_norm", format_real(v.global_drift_norm)}};
  if (v.cycle_enumeration_truncated) r.warnings.push_back("cycle enumeration truncated; cone verdict is a lower bound");
  for (const auto& msg : v.diagnostics) r.warnings.push_back(msg);
}

void verb_moments(const ProcessSpec& spec, RunReport& r) {
  const MomentData m = moments(spec);
  const int p = spec.states();
  r.outputs.emplace_back("pi", vec(m.pi.transpose()));
  r.outputs.emplace_back("global_drift", vec(m.global_drift));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const std::string tag = "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
      r.outputs.emplace_back("local_drift" + tag, vec(m.drift(i, j)));
      r.outputs.emplace_back("second_moment" + tag, mat(m.second_moment(i, j)));
    }
}

void verb_section(const ProcessSpec& spec, RunReport& r) {
  const SectionMatrix g = appropriate_section(spec);
  const MomentData m = moments(apply_section(spec, g));
  const int p = spec.states();
  r.outputs.emplace_back("g", mat(g.g));
  double worst = 0.0;
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(spec.dim());
    for (int j = 0; j < p; ++j) row += m.drift(i, j);
    r.outputs.emplace_back("row_drift[" + std::to_string(i + 1) + "]", vec(row));
    worst = std::max(worst, (row - m.global_drift).cwiseAbs().maxCoeff());
  }
  r.outputs.emplace_back("appropriateness_residual", format_real(worst));
  r.outputs.emplace_back("sigma", mat(energy_matrix(spec, g).sigma));
}

void verb_boundary(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  BoundaryTrace trace;
  if (!cmd.u.empty()) {
    trace.points.push_back(boundary_point(spec, direction_of(cmd, spec.dim())));
    trace.max_direction_residual = trace.points.back().direction_residual;
  } else {
    if (cmd.directions < 1) throw PreconditionError("--directions must be positive");
    trace = boundary_trace(spec, cmd.directions);
  }
  r.outputs = {{"points", std::to_string(trace.points.size())},
               {"max_step", format_real(trace.max_step)},
               {"max_direction_residual", format_real(trace.max_direction_residual)}};
  std::ostringstream csv;
  write_boundary_csv(csv, trace);
  emit_table(r, cmd, csv.str());
}

void verb_green(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  const int i = cmd.i - 1;
  const int j = cmd.j - 1;
  const LatticeVector x = target_of(cmd, spec.dim());
  GreenEstimate e;
  switch (parse_green_method(cmd.method)) {
    case GreenMethod::series: {
      SeriesOptions o;
      if (cmd.horizon > 0) o.horizon = cmd.horizon;
      o.tolerance = cmd.tolerance;
      e = green_series(spec, i, x, j, o);
      break;
    }
    case GreenMethod::resolvent: {
      ResolventOptions o;
      o.mode = parse_resolvent_mode(cmd.mode);
      o.grid = cmd.grid;
      if (cmd.tolerance > 0) o.tolerance = cmd.tolerance;
      e = green_resolvent(spec, i, x, j, o);
      break;
    }
    case GreenMethod::monte_carlo: {
      McOptions o;
      if (cmd.horizon > 0) o.horizon = cmd.horizon;
      o.paths = cmd.paths;
      o.seed = cmd.seed;
      e = green_mc(spec, i, x, j, o);
      break;
    }
  }
  r.outputs = {{"method", to_string(e.method)}, {"value", format_real(e.value)}, {"error", format_real(e.error)},
               {"converged", flag(e.converged)}};
  for (const auto& [k, v] : e.params) r.outputs.emplace_back("param." + k, format_real(v));
  if (!e.converged) r.warnings.push_back("estimate did not reach the requested accuracy");
}

AsymptoticOptions asym_options(const Command& cmd, int d) {
  AsymptoticOptions o;
  if (cmd.m_exponent) o.m_exponent = *cmd.m_exponent;
  if (cmd.printed_exponent) o.m_exponent = printed_m_exponent(d);
  return o;
}

void verb_asym(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  const int d = spec.dim();
  const AsymptoticOptions o = asym_options(cmd, d);
  Eigen::VectorXd u;
  std::optional<LatticeVector> x;
  if (!cmd.x.empty()) {
    x = target_of(cmd, d);
    u = x->to_real();
    if (u.norm() == 0.0) throw PreconditionError("asymptotic equivalent needs x != 0");
    u.normalize();
  } else {
    u = direction_of(cmd, d);
  }
  const AsymptoticCoefficient a = asymptotic_coefficient(spec, u, o);
  r.outputs = {{"u", vec(a.u)},
               {"c", vec(a.c)},
               {"m_c_norm", format_real(a.m_c_norm)},
               {"m_exponent", format_real(a.m_exponent)},
               {"sigma_u_1", mat(a.sigma_u_1)},
               {"phi", vec(a.phi)},
               {"proj0", mat(a.proj0)},
               {"chi", mat(a.chi)}};
  if (x) r.outputs.emplace_back("asymptotic_green", format_real(asymptotic_green(spec, cmd.i - 1, *x, cmd.j - 1, o)));
}

void verb_compare(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  CompareOptions o;
  o.methods.clear();
  for (const auto& m : cmd.methods) o.methods.push_back(parse_green_method(m));
  if (cmd.horizon > 0) {
    o.series.horizon = cmd.horizon;
    o.mc.horizon = cmd.horizon;
  }
  o.series.tolerance = cmd.tolerance;
  o.resolvent.mode = parse_resolvent_mode(cmd.mode);
  o.resolvent.grid = cmd.grid;
  o.mc.paths = cmd.paths;
  o.mc.seed = cmd.seed;
  o.asymptotic = asym_options(cmd, spec.dim());
  if (cmd.radii.empty()) throw PreconditionError("--radii is required");
  const CompareReport rep = compare(spec, direction_of(cmd, spec.dim()), cmd.radii, cmd.i - 1, cmd.j - 1, o);
  r.outputs = {{"c", vec(rep.coefficient.c)},
               {"chi", format_real(rep.coefficient.chi(cmd.i - 1, cmd.j - 1))},
               {"doob_residual", format_real(rep.doob_residual)}};
  std::ostringstream csv;
  write_compare_csv(csv, rep);
  emit_table(r, cmd, csv.str());
}

void verb_simulate(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  const auto path = simulate_path(spec, cmd.i - 1, cmd.steps, cmd.seed);
  r.outputs = {{"steps", std::to_string(cmd.steps)}, {"seed", std::to_string(cmd.seed)}};
  std::ostringstream csv;
  write_path_csv(csv, path);
  emit_table(r, cmd, csv.str());
}

void verb_checks(const ProcessSpec& spec, const Command& cmd, RunReport& r) {
  CheckOptions o;
  o.directions = cmd.directions;
  o.seed = cmd.seed;
  const auto results = run_checks(spec, o);
  std::ostringstream csv;
  csv << "check,passed,value,threshold,detail\n";
  int failed = 0;
  for (const auto& c : results) {
    failed += !c.passed;
    csv << c.name << ',' << (c.passed ? "true" : "false") << ',' << format_real(c.value) << ','
        << format_real(c.threshold) << ',' << c.detail << '\n';
  }
  r.outputs = {{"checks", std::to_string(results.size())}, {"failed", std::to_string(failed)}};
  emit_table(r, cmd, csv.str());
  if (failed) {
    r.exit_code = 1;
    r.error = std::to_string(failed) + " check(s) failed";
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ProcessSpec parse_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SpecError("JSON parse error at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  const std::string top = "spec";
  const std::int64_t d = integer_field(doc, "d", top);
  const std::int64_t p = integer_field(doc, "p", top);
  if (d < 1 || d > 64) throw SpecError("field 'd' must be a positive integer");
  if (p < 1 || p > 4096) throw SpecError("field 'p' must be a positive integer");
  const json& jumps = field(doc, "jumps", top);
  if (!jumps.is_array()) throw SpecError("field 'jumps' must be an array");

  std::vector<JumpMeasure> mu(static_cast<std::size_t>(p * p));
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const std::string where = "jumps[" + std::to_string(k) + "]";
    const json& entry = jumps[k];
    const std::int64_t from = integer_field(entry, "from", where);
    const std::int64_t to = integer_field(entry, "to", where);
    if (from < 1 || from > p) throw SpecError("field 'from' in " + where + " must lie in 1..p");
    if (to < 1 || to > p) throw SpecError("field 'to' in " + where + " must lie in 1..p");
    const json& atoms = field(entry, "atoms", where);
    if (!atoms.is_array()) throw SpecError("field 'atoms' in " + where + " must be an array");
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const std::string at = where + ".atoms[" + std::to_string(a) + "]";
      const json& dx = field(atoms[a], "dx", at);
      if (!dx.is_array() || dx.size() != static_cast<std::size_t>(d))
        throw SpecError("field 'dx' in " + at + " must be an array of d = " + std::to_string(d) + " integers");
      std::vector<std::int64_t> coords;
      for (const auto& c : dx) {
        if (!c.is_number_integer()) throw SpecError("field 'dx' in " + at + " must contain integers");
        coords.push_back(c.get<std::int64_t>());
      }
      const json& prob = field(atoms[a], "prob", at);
      if (!prob.is_number()) throw SpecError("field 'prob' in " + at + " must be a number");
      const double m = prob.get<double>();
      if (!(m >= 0.0) || !std::isfinite(m)) throw SpecError("field 'prob' in " + at + " must be non-negative");
      mu[static_cast<std::size_t>((from - 1) * p + (to - 1))].add(LatticeVector(std::move(coords)), m);
    }
  }
  return ProcessSpec(static_cast<int>(d), static_cast<int>(p), std::move(mu));
}

ProcessSpec load_spec(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SpecError("cannot read spec file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_spec(ss.str());
}

std::string spec_to_json(const ProcessSpec& spec) {
  json doc;
  doc["d"] = spec.dim();
  doc["p"] = spec.states();
  doc["jumps"] = json::array();
  for (int i = 0; i < spec.states(); ++i)
    for (int j = 0; j < spec.states(); ++j) {
      const auto& mu = spec.jump(i, j);
      if (mu.empty()) continue;
      json entry{{"from", i + 1}, {"to", j + 1}, {"atoms", json::array()}};
      for (const auto& [x, mass] : mu.atoms()) entry["atoms"].push_back({{"dx", x.coords}, {"prob", mass}});
      doc["jumps"].push_back(std::move(entry));
    }
  return doc.dump(2);
}

void write_boundary_csv(std::ostream& out, const BoundaryTrace& trace) {
  if (trace.points.empty()) return;
  const Eigen::Index d = trace.points.front().u.size();
  for (const char* prefix : {"u_", "c_", "m_c_"})
    for (Eigen::Index k = 1; k <= d; ++k) out << prefix << k << ',';
  out << "rho_residual,direction_residual\n";
  for (const auto& bp : trace.points) {
    for (const Eigen::VectorXd* v : {&bp.u, &bp.c, &bp.m_c})
      for (Eigen::Index k = 0; k < d; ++k) out << format_real((*v)[k]) << ',';
    out << format_real(bp.rho_residual) << ',' << format_real(bp.direction_residual) << '\n';
  }
}

void write_compare_csv(std::ostream& out, const CompareReport& report) {
  const std::size_t d = static_cast<std::size_t>(report.coefficient.u.size());
  out << "r,";
  for (std::size_t k = 1; k <= d; ++k) out << "x_" << k << ',';
  out << "method,value,error,asym,ratio\n";
  for (const auto& row : report.rows) {
    out << format_real(row.r) << ',';
    for (std::size_t k = 0; k < d; ++k) out << row.x[k] << ',';
    out << to_string(row.method) << ',' << format_real(row.value) << ',' << format_real(row.error) << ','
        << format_real(row.asym) << ',' << format_real(row.ratio) << '\n';
  }
}

void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path) {
  if (path.empty()) return;
  const std::size_t d = path.front().x.dim();
  out << "n,";
  for (std::size_t k = 1; k <= d; ++k) out << "x_" << k << ',';
  out << "state\n";
  for (std::size_t n = 0; n < path.size(); ++n) {
    out << n << ',';
    for (std::size_t k = 0; k < d; ++k) out << path[n].x[k] << ',';
    out << path[n].state + 1 << '\n';
  }
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{"validate", "moments", "section", "boundary", "green",
                                          "asym",     "compare", "simulate", "checks"};
  return v;
}

std::string command_echo(const Command& cmd) {
  std::ostringstream s;
  s << "madd " << cmd.verb;
  if (!cmd.spec_path.empty()) s << " --spec " << cmd.spec_path;
  return s.str();
}

RunReport run(const Command& cmd) {
  RunReport r;
  r.command = command_echo(cmd);
  const auto start = std::chrono::steady_clock::now();
  try {
    if (std::find(verbs().begin(), verbs().end(), cmd.verb) == verbs().end())
      throw PreconditionError("unknown verb '" + cmd.verb + "'");
    if (cmd.spec_path.empty()) throw SpecError("--spec is required");
    const ProcessSpec spec = load_spec(cmd.spec_path);
    if (cmd.i < 1 || cmd.i > spec.states() || cmd.j < 1 || cmd.j > spec.states())
      throw PreconditionError("--i and --j must lie in 1..p");
    if (cmd.verb == "validate") verb_validate(spec, r);
    else if (cmd.verb == "moments") verb_moments(spec, r);
    else if (cmd.verb == "section") verb_section(spec, r);
    else if (cmd.verb == "boundary") verb_boundary(spec, cmd, r);
    else if (cmd.verb == "green") verb_green(spec, cmd, r);
    else if (cmd.verb == "asym") verb_asym(spec, cmd, r);
    else if (cmd.verb == "compare") verb_compare(spec, cmd, r);
    else if (cmd.verb == "simulate") verb_simulate(spec, cmd, r);
    else verb_checks(spec, cmd, r);
  } catch (const Error& e) {
    r.exit_code = e.exit_code();
    r.error = e.what();
  } catch (const std::exception& e) {
    r.exit_code = 1;
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string render(const RunReport& report) {
  std::ostringstream s;
  s << "command: " << report.command << '\n';
  for (const auto& [k, v] : report.outputs) s << k << ": " << v << '\n';
  for (const auto& p : report.csv_paths) s << "csv: " << p << '\n';
  for (const auto& w : report.warnings) s << "warning: " << w << '\n';
  if (!report.table.empty()) s << report.table;
  return s.str();
}

}  // namespace madd
