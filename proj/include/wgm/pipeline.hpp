#ifndef WGM_PIPELINE_HPP
#define WGM_PIPELINE_HPP

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "wgm/analytic.hpp"
#include "wgm/dtn.hpp"
#include "wgm/fem.hpp"
#include "wgm/materials.hpp"
#include "wgm/mesh.hpp"
#include "wgm/modes.hpp"

namespace wgm
{

enum class PencilKind
{
  Vd1,
  Vd2
};

struct SolveOptions
{
  double omega = 1.0;
  int num_modes = 12;
  std::optional<Complex> shift;  // default w^2 max(eps mu)
  PencilKind pencil = PencilKind::Vd1;
  ModeTolerances tol;
  double solver_tol = 1e-12;
  int krylov_dim = 0;
  int max_restarts = 300;
  double cutoff_tol = 1e-6;
  int extra_modes = 4;  // requested beyond num_modes so clusters at the cut can be completed
  std::set<std::string> pec_tags{kPecTag};
  int threads = 1;
  bool schur = true;  // compute Schur residuals
};

struct SolveResult
{
  DofMap dofs;
  PencilBlocks blocks;
  double omega = 0.0;
  Complex sigma;
  double cutoff_distance = 0.0;
  std::vector<Mode> modes;  // sorted by |beta^2 - sigma|
  std::vector<ModeCluster> clusters;
  std::vector<Complex> excluded;  // |beta^2| < 1e-8 w^2
};

// Cutoff check, assembly, shift-invert Arnoldi, branch selection, normalization and clustering.
// Throws Error(Cutoff) when w^2 is within cutoff_tol of a Dirichlet eigenvalue of the scalar
// Helmholtz operator.
SolveResult solve_modes(const Mesh &mesh, const MaterialMap &materials, const SolveOptions &opts);

// Hollow rectangle with constant materials, recognised from the mesh.
struct RectGeometry
{
  double x0 = 0.0, y0 = 0.0, a = 1.0, b = 1.0;
  double eps = 1.0, mu = 1.0;
};
std::optional<RectGeometry> detect_rectangle(const Mesh &mesh, const MaterialMap &materials);

struct CheckResult
{
  std::string name;
  bool pass = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport
{
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// Orthogonality, normalization, conjugation symmetry, sector, branch rule, Schur residual, axial
// recovery and a vd1-vs-vd2 cross solve.
VerifyReport verify_modes(const Mesh &mesh, const MaterialMap &materials, const SolveOptions &opts,
                          const SolveResult &result);
void print_report(std::ostream &os, const VerifyReport &report);

struct ConvergenceRow
{
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  std::vector<double> beta_sq;
  std::vector<double> error;
  std::vector<double> order;  // NaN on the first level
};

struct ConvergenceTable
{
  std::vector<RectMode> reference;
  std::vector<ConvergenceRow> rows;
};

// Solves on `levels` uniformly refined meshes and compares the leading real beta^2 with the
// rectangle oracle. Needs levels >= 3 and a mesh accepted by detect_rectangle.
ConvergenceTable convergence_study(const Mesh &mesh, const MaterialMap &materials,
                                   const SolveOptions &opts, int levels, int tracked = 3);
void print_convergence(std::ostream &os, const ConvergenceTable &table);

double max_edge_length(const Mesh &mesh);

// index,re_beta_sq,im_beta_sq,re_beta,im_beta,classification,residual,schur_residual
void write_mode_table(std::ostream &os, const std::vector<Mode> &modes);
void write_mode_table(const std::string &path, const std::vector<Mode> &modes);

// Legacy VTK unstructured grid: per-cell E (real and imaginary parts at centroids) and per-node
// linearized axial field, one array pair per mode.
void export_fields(std::ostream &os, const Mesh &mesh, const DofMap &dofs,
                   const std::vector<Mode> &modes);
void export_fields(const std::string &path, const Mesh &mesh, const DofMap &dofs,
                   const std::vector<Mode> &modes);

}  // namespace wgm

#endif  // WGM_PIPELINE_HPP
