#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "madd/boundary.hpp"
#include "madd/green.hpp"
#include "madd/process_model.hpp"

namespace madd {

/// Parses the JSON process format
///   {"d": 1, "p": 2, "jumps": [{"from": 1, "to": 2, "atoms": [{"dx": [0], "prob": 0.3}]}]}
/// with 1-based layer indices. Repeated (from, to) entries are merged.
/// Throws SpecError with line and column on malformed JSON and with the
/// offending field on schema violations.
[[nodiscard]] ProcessSpec parse_spec(std::string_view text);
[[nodiscard]] ProcessSpec load_spec(const std::string& path);
[[nodiscard]] std::string spec_to_json(const ProcessSpec& spec);

/// 12 significant digits.
[[nodiscard]] std::string format_real(double v);

void write_boundary_csv(std::ostream& out, const BoundaryTrace& trace);
void write_compare_csv(std::ostream& out, const CompareReport& report);
void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path);

struct Command {
  std::string verb;
  std::string spec_path;
  /// 1-based layers.
  int i = 1;
  int j = 1;
  std::vector<std::int64_t> x;
  std::vector<double> u;
  std::vector<double> radii;
  std::string method = "series";
  std::vector<std::string> methods{"series"};
  std::string mode = "tilted";
  int directions = 16;
  int horizon = 0;
  std::int64_t paths = 100000;
  std::uint64_t seed = 1;
  int grid = 0;
  double tolerance = 0.0;
  std::optional<double> m_exponent;
  bool printed_exponent = false;
  int steps = 100;
  /// CSV destination; empty writes the table to the report body.
  std::string output;
};

struct RunReport {
  std::string command;
  double wall_time = 0.0;
  std::vector<std::pair<std::string, std::string>> outputs;
  /// CSV text when no output path was given.
  std::string table;
  std::vector<std::string> csv_paths;
  std::vector<std::string> warnings;
  int exit_code = 0;
  std::string error;
};

/// Verbs understood by run().
[[nodiscard]] const std::vector<std::string>& verbs();

/// Shell-like echo of the command.
[[nodiscard]] std::string command_echo(const Command& cmd);

/// Loads the spec, dispatches the verb and maps library errors to exit codes
/// (2 spec, 3 precondition, 4 numeric, 5 resource; 1 for failed checks).
/// Never throws for library errors.
[[nodiscard]] RunReport run(const Command& cmd);

/// Deterministic text rendering (wall time excluded).
[[nodiscard]] std::string render(const RunReport& report);

}  // namespace madd
