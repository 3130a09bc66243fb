#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "madd/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Markov-additive Green function toolkit"};
  app.require_subcommand(1);
  madd::Command cmd;

  for (const auto& verb : madd::verbs()) {
    CLI::App* sub = app.add_subcommand(verb);
    sub->add_option("--spec", cmd.spec_path, "process spec (JSON)")->required();
    sub->add_option("--i", cmd.i, "source layer (1-based)");
    sub->add_option("--j", cmd.j, "target layer (1-based)");
    sub->add_option("--x", cmd.x, "target lattice point")->expected(1, 64)->delimiter(',');
    sub->add_option("--u", cmd.u, "direction")->expected(1, 64)->delimiter(',');
    sub->add_option("--radii", cmd.radii, "radii for compare")->expected(1, 1000)->delimiter(',');
    sub->add_option("--method", cmd.method, "series | resolvent | monte-carlo");
    sub->add_option("--methods", cmd.methods, "methods for compare")->expected(1, 3)->delimiter(',');
    sub->add_option("--mode", cmd.mode, "resolvent mode: tilted | damped | undamped");
    sub->add_option("--directions", cmd.directions, "number of sampled directions");
    sub->add_option("--horizon", cmd.horizon, "series / Monte-Carlo horizon");
    sub->add_option("--paths", cmd.paths, "Monte-Carlo paths");
    sub->add_option("--seed", cmd.seed, "random seed");
    sub->add_option("--grid", cmd.grid, "Fourier grid points per axis");
    sub->add_option("--tolerance", cmd.tolerance, "series tail / resolvent tolerance");
    sub->add_option("--m-exponent", cmd.m_exponent, "exponent of |m_c| in the coefficient");
    sub->add_flag("--printed-exponent", cmd.printed_exponent, "use the exponent (d-1)/3");
    sub->add_option("--steps", cmd.steps, "path length for simulate");
    sub->add_option("--output", cmd.output, "CSV output path");
    sub->callback([&cmd, verb] { cmd.verb = verb; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const madd::RunReport report = madd::run(cmd);
  std::cout << madd::render(report);
  std::fprintf(stderr, "wall_time: %.3f s\n", report.wall_time);
  if (report.exit_code != 0) std::fprintf(stderr, "error: %s\n", report.error.c_str());
  return report.exit_code;
}
