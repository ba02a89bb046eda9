// wgmodes: waveguide mode solver and modal DtN builder.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wgm/dtn.hpp"
#include "wgm/error.hpp"
#include "wgm/pipeline.hpp"

namespace
{

using namespace wgm;

struct RunConfig
{
  std::string mesh;
  std::string materials;
  double omega = 0.0;
  int num_modes = 12;
  std::string shift;
  std::string pencil = "vd1";
  std::string out;
  std::string dtn_out;
  std::string fields_out;
  double tol_real = 1e-8;
  double tol_cluster = 1e-6;
  double tol_orth = 1e-8;
  double tol_degenerate = 1e-10;
  double tol_solver = 1e-12;
  double tol_cutoff = 1e-6;
  int threads = 1;
  int levels = 3;
  bool no_dense = false;
  bool skip_degenerate = false;
  // gen-rect
  double a = 1.0, b = 0.5;
  int nx = 32, ny = 16;
};

std::optional<Complex> parse_shift(const std::string &s)
{
  if (s.empty())
  {
    return std::nullopt;
  }
  const auto comma = s.find(',');
  std::size_t used = 0;
  try
  {
    const double re = std::stod(s.substr(0, comma), &used);
    if (used != s.substr(0, comma).size()) throw std::invalid_argument(s);
    double im = 0.0;
    if (comma != std::string::npos)
    {
      const std::string t = s.substr(comma + 1);
      im = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(s);
    }
    return Complex(re, im);
  }
  catch (const std::exception &)
  {
    throw Error(ErrorKind::Validation, "cli", "invalid --shift '" + s + "' (expected re or re,im)");
  }
}

struct Problem
{
  Mesh mesh;
  MaterialMap materials;
  SolveOptions opts;
};

Problem load(const RunConfig &cfg)
{
  if (cfg.mesh.empty())
  {
    throw Error(ErrorKind::Validation, "cli", "--mesh is required");
  }
  if (!(cfg.omega > 0.0))
  {
    throw Error(ErrorKind::Validation, "cli", "--omega must be positive");
  }
  if (cfg.num_modes < 1)
  {
    throw Error(ErrorKind::Validation, "cli", "--num-modes must be at least 1");
  }
  if (cfg.threads < 1)
  {
    throw Error(ErrorKind::Validation, "cli", "--threads must be at least 1");
  }
  Problem p;
  p.mesh = read_mesh_file(cfg.mesh);
  p.materials = cfg.materials.empty() ? uniform_materials(p.mesh, 1.0, 1.0)
                                      : read_materials_file(cfg.materials, p.mesh.num_nodes());
  p.materials.check_against(p.mesh);
  auto &o = p.opts;
  o.omega = cfg.omega;
  o.num_modes = cfg.num_modes;
  o.shift = parse_shift(cfg.shift);
  if (cfg.pencil != "vd1" && cfg.pencil != "vd2")
  {
    throw Error(ErrorKind::Validation, "cli", "--pencil must be vd1 or vd2");
  }
  o.pencil = cfg.pencil == "vd1" ? PencilKind::Vd1 : PencilKind::Vd2;
  o.tol.real_tol = cfg.tol_real;
  o.tol.cluster_tol = cfg.tol_cluster;
  o.tol.orth_tol = cfg.tol_orth;
  o.tol.degenerate_tol = cfg.tol_degenerate;
  o.solver_tol = cfg.tol_solver;
  o.cutoff_tol = cfg.tol_cutoff;
  o.threads = cfg.threads;
  return p;
}

void write_table(const RunConfig &cfg, const std::vector<Mode> &modes)
{
  if (cfg.out.empty() || cfg.out == "-")
  {
    write_mode_table(std::cout, modes);
  }
  else
  {
    write_mode_table(cfg.out, modes);
  }
}

int cmd_solve(const RunConfig &cfg)
{
  const Problem p = load(cfg);
  const SolveResult res = solve_modes(p.mesh, p.materials, p.opts);
  write_table(cfg, res.modes);
  if (!cfg.fields_out.empty())
  {
    export_fields(cfg.fields_out, p.mesh, res.dofs, res.modes);
  }
  for (Complex z : res.excluded)
  {
    std::cerr << "warning: excluded near-zero beta^2 = " << z << "\n";
  }
  return 0;
}

int cmd_dtn(const RunConfig &cfg)
{
  if (cfg.dtn_out.empty())
  {
    throw Error(ErrorKind::Validation, "cli", "--dtn-out is required");
  }
  const Problem p = load(cfg);
  const SolveResult res = solve_modes(p.mesh, p.materials, p.opts);
  DtnOptions dopt;
  dopt.skip_degenerate = cfg.skip_degenerate;
  dopt.fingerprint = fingerprint_hex(mesh_fingerprint(p.mesh));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", res.sigma.real());
  dopt.params = {{"pencil", cfg.pencil}, {"num_modes", std::to_string(cfg.num_modes)},
                 {"shift_re", buf}};
  std::snprintf(buf, sizeof buf, "%.17g", res.sigma.imag());
  dopt.params.emplace_back("shift_im", buf);
  const DtnMatrix dtn = build_dtn(res.blocks, cfg.omega, res.modes, res.clusters, dopt);
  export_dtn(dtn, cfg.dtn_out, !cfg.no_dense);

  std::printf("sign %+d (energy test: %s)\n", dtn.sign, dtn.param("energy_test").c_str());
  for (int j = 0; j < dtn.num_modes(); ++j)
  {
    const auto &m = dtn.modes[j];
    std::printf("mode %d beta %.12g %+.12gi %s\n", j, m.beta.real(), m.beta.imag(),
                class_name(m.classification));
  }
  std::printf("truncation_indicator %.6e\n", truncation_indicator(dtn));
  if (!cfg.out.empty())
  {
    write_table(cfg, res.modes);
  }
  return 0;
}

int cmd_verify(const RunConfig &cfg)
{
  const Problem p = load(cfg);
  const SolveResult res = solve_modes(p.mesh, p.materials, p.opts);
  const VerifyReport rep = verify_modes(p.mesh, p.materials, p.opts, res);
  print_report(std::cout, rep);
  return rep.all_pass() ? 0 : exit_code(ErrorKind::Validation);
}

int cmd_convergence(const RunConfig &cfg)
{
  const Problem p = load(cfg);
  const ConvergenceTable tab = convergence_study(p.mesh, p.materials, p.opts, cfg.levels);
  if (cfg.out.empty() || cfg.out == "-")
  {
    print_convergence(std::cout, tab);
  }
  else
  {
    std::ostringstream ss;
    print_convergence(ss, tab);
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f || !(f << ss.str()))
    {
      throw Error(ErrorKind::Io, "cli", "cannot write '" + cfg.out + "'");
    }
  }
  return 0;
}

int cmd_gen_rect(const RunConfig &cfg)
{
  if (!(cfg.a > 0.0) || !(cfg.b > 0.0) || cfg.nx < 1 || cfg.ny < 1)
  {
    throw Error(ErrorKind::Validation, "cli", "gen-rect needs a, b > 0 and nx, ny >= 1");
  }
  const Mesh mesh = generate_rect_mesh(cfg.a, cfg.b, cfg.nx, cfg.ny);
  if (cfg.out.empty() || cfg.out == "-")
  {
    std::cout << serialize_mesh(mesh);
  }
  else
  {
    write_mesh_file(mesh, cfg.out);
  }
  return 0;
}

void diagnose(const char *kind, const std::string &module, const std::string &msg)
{
  std::cerr << "error: " << kind << ": " << module << ": " << msg << "\n";
}

}  // namespace

int main(int argc, char **argv)
{
  RunConfig cfg;
  CLI::App app{"Waveguide mode solver and modal Dirichlet-to-Neumann builder"};
  app.set_config("--config", "", "Flat 'key = value' configuration file");
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--mesh", cfg.mesh, "Mesh file");
  app.add_option("--materials", cfg.materials, "Materials file (default: eps = mu = 1 everywhere)");
  app.add_option("--omega", cfg.omega, "Angular frequency (c = 1)");
  app.add_option("--num-modes", cfg.num_modes, "Number of modes nearest the shift");
  app.add_option("--shift", cfg.shift, "Shift 're' or 're,im' (default w^2 max(eps mu))");
  app.add_option("--pencil", cfg.pencil, "vd1 or vd2");
  app.add_option("--out", cfg.out, "Output file (mode CSV, convergence table or mesh)");
  app.add_option("--dtn-out", cfg.dtn_out, "WGDTN1 output file");
  app.add_option("--fields-out", cfg.fields_out, "Legacy VTK field file");
  app.add_option("--tol-real", cfg.tol_real, "Relative tolerance for real beta");
  app.add_option("--tol-cluster", cfg.tol_cluster, "Relative cluster tolerance");
  app.add_option("--tol-orth", cfg.tol_orth, "Orthogonality tolerance");
  app.add_option("--tol-degenerate", cfg.tol_degenerate, "Degeneracy tolerance");
  app.add_option("--tol-solver", cfg.tol_solver, "Arnoldi convergence tolerance");
  app.add_option("--tol-cutoff", cfg.tol_cutoff, "Relative cutoff rejection tolerance");
  app.add_option("--threads", cfg.threads, "Worker threads for assembly");

  auto *solve = app.add_subcommand("solve", "Compute modes and write the mode table");
  auto *dtn = app.add_subcommand("dtn", "Compute modes and export the DtN matrix");
  dtn->add_flag("--no-dense", cfg.no_dense, "Write only the factored form");
  dtn->add_flag("--skip-degenerate", cfg.skip_degenerate, "Drop degenerate clusters");
  auto *verify = app.add_subcommand("verify", "Run the property checks on a solve");
  auto *conv = app.add_subcommand("convergence", "Refinement study against the rectangle oracle");
  conv->add_option("--levels", cfg.levels, "Number of mesh levels (>= 3)");
  auto *gen = app.add_subcommand("gen-rect", "Write a structured rectangle mesh");
  gen->add_option("--a", cfg.a, "Width");
  gen->add_option("--b", cfg.b, "Height");
  gen->add_option("--nx", cfg.nx, "Cells along x");
  gen->add_option("--ny", cfg.ny, "Cells along y");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::Success &e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError &e)
  {
    diagnose("validation", "cli", e.what());
    return exit_code(ErrorKind::Validation);
  }

  try
  {
    if (solve->parsed()) return cmd_solve(cfg);
    if (dtn->parsed()) return cmd_dtn(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (conv->parsed()) return cmd_convergence(cfg);
    if (gen->parsed()) return cmd_gen_rect(cfg);
  }
  catch (const Error &e)
  {
    diagnose(kind_name(e.kind()), e.module(), e.what());
    return exit_code(e.kind());
  }
  catch (const std::exception &e)
  {
    diagnose("solver", "cli", e.what());
    return exit_code(ErrorKind::Solver);
  }
  return 0;
}
