#include "wgm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "wgm/eigensolver.hpp"
#include "wgm/error.hpp"

namespace wgm
{

namespace
{

std::string fmt(const char *f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

Pencil make_pencil(const PencilBlocks &blocks, double omega, PencilKind kind)
{
  return kind == PencilKind::Vd1 ? pencil_vd1(blocks, omega) : pencil_vd2(blocks, omega);
}

std::vector<RitzPair> solve_pencil(const Pencil &P, Complex &sigma, const SolveOptions &opts,
                                   int nev, bool allow_perturb)
{
  ArnoldiOptions ao;
  ao.nev = nev;
  ao.krylov_dim = opts.krylov_dim;
  ao.tol = opts.solver_tol;
  ao.max_restarts = opts.max_restarts;
  for (int attempt = 0;; ++attempt)
  {
    try
    {
      return shift_invert_arnoldi(P.A, P.B, sigma, ao);
    }
    catch (const Error &e)
    {
      const bool singular = std::string(e.what()).rfind("factorization", 0) == 0;
      if (!allow_perturb || !singular || attempt == 3)
      {
        throw;
      }
      // The shift sits on an eigenvalue (e.g. a TEM mode at w^2 eps mu); move it slightly.
      sigma *= 1.0 + 1e-3 * (attempt + 1);
    }
  }
}

// Groups of modes with one real eigenvalue (up to roundoff) get a real basis.
void realify(const Pencil &P, std::vector<Mode> &modes, const ModeTolerances &tol)
{
  const int n = static_cast<int>(modes.size());
  std::vector<bool> done(n, false);
  for (int i = 0; i < n; ++i)
  {
    if (done[i]) continue;
    const Complex li = modes[i].beta_sq;
    if (std::abs(li.imag()) > tol.real_tol * std::abs(li)) continue;
    std::vector<int> group{i};
    for (int j = i + 1; j < n; ++j)
    {
      const Complex lj = modes[j].beta_sq;
      if (!done[j] && std::abs(lj.imag()) <= tol.real_tol * std::abs(lj) &&
          std::abs(lj - li) <= 1e-10 * std::max(std::abs(li), 1.0))
      {
        group.push_back(j);
      }
    }
    for (int j : group) done[j] = true;
    if (make_real_basis(modes, group))
    {
      for (int j : group)
      {
        VectorXcd x(modes[j].u.size() + modes[j].p.size());
        x << modes[j].u, modes[j].p;
        modes[j].residual = pencil_residual(P.A, P.B, modes[j].beta_sq, x);
      }
    }
  }
}

bool on_segment_line(double v, double ref, double scale) { return std::abs(v - ref) <= 1e-12 * scale; }

}  // namespace

SolveResult solve_modes(const Mesh &mesh, const MaterialMap &materials, const SolveOptions &opts)
{
  if (!(opts.omega > 0.0) || !std::isfinite(opts.omega))
  {
    throw Error(ErrorKind::Validation, "modes", "omega must be positive");
  }
  if (opts.num_modes < 1)
  {
    throw Error(ErrorKind::Validation, "modes", "num_modes must be at least 1");
  }
  materials.check_against(mesh);

  SolveResult res;
  res.omega = opts.omega;
  res.dofs = build_dofmap(mesh, opts.pec_tags);
  if (res.dofs.num_edge_dofs() == 0)
  {
    throw Error(ErrorKind::Validation, "fem", "mesh has no free edge dofs");
  }
  res.blocks = assemble_blocks(mesh, res.dofs, materials, opts.threads);

  res.cutoff_distance = cutoff_distance(res.blocks, opts.omega);
  if (res.cutoff_distance < opts.cutoff_tol)
  {
    throw Error(ErrorKind::Cutoff, "eigen",
                "omega = " + g17(opts.omega) +
                  " is a cutoff frequency: w^2 lies within relative distance " +
                  fmt("%.3g", res.cutoff_distance) + " of a Dirichlet eigenvalue (tolerance " +
                  fmt("%.3g", opts.cutoff_tol) + ")");
  }

  const Pencil P = make_pencil(res.blocks, opts.omega, opts.pencil);
  res.sigma = opts.shift ? *opts.shift : Complex(opts.omega * opts.omega * materials.max_eps_mu(mesh));
  const int ne = res.dofs.num_edge_dofs();
  const int nev = std::min(opts.num_modes + std::max(opts.extra_modes, 0), ne);
  const auto pairs = solve_pencil(P, res.sigma, opts, nev, !opts.shift.has_value());

  std::vector<Mode> all;
  const double zero_tol = 1e-8 * opts.omega * opts.omega;
  for (const auto &pr : pairs)
  {
    if (std::abs(pr.lambda) < zero_tol)
    {
      res.excluded.push_back(pr.lambda);
      continue;
    }
    all.push_back(make_mode(pr, ne, opts.tol.real_tol));
  }

  // Keep num_modes, then pull in partners of kept modes so no cluster is split by the cut.
  const int keep = std::min<int>(opts.num_modes, static_cast<int>(all.size()));
  std::vector<Mode> kept(all.begin(), all.begin() + keep);
  for (std::size_t j = keep; j < all.size(); ++j)
  {
    bool partner = false;
    for (const auto &m : kept)
    {
      partner = partner || conjugate_related(all[j].beta_sq, m.beta_sq, opts.tol.cluster_tol) ||
                conjugate_related(m.beta_sq, all[j].beta_sq, opts.tol.cluster_tol);
    }
    if (partner)
    {
      kept.push_back(all[j]);
    }
  }

  realify(P, kept, opts.tol);
  for (auto &m : kept)
  {
    m.beta = select_branch(m.beta_sq, opts.tol.real_tol);
    m.classification = classify(m.beta, opts.tol.real_tol);
    m = normalize_mode(res.blocks, opts.omega, std::move(m), opts.tol.degenerate_tol);
  }
  if (opts.schur && res.blocks.num_vertex_dofs() > 0)
  {
    SchurResidual sr(res.blocks, opts.omega);
    for (auto &m : kept) m.schur_residual = sr(m);
  }
  else if (opts.schur)
  {
    for (auto &m : kept) m.schur_residual = schur_residual(res.blocks, opts.omega, m);
  }
  res.modes = std::move(kept);
  res.clusters = detect_clusters(res.blocks, opts.omega, res.modes, opts.tol);
  return res;
}

std::optional<RectGeometry> detect_rectangle(const Mesh &mesh, const MaterialMap &materials)
{
  if (mesh.num_triangles() == 0) return std::nullopt;
  RectGeometry g;
  bool first = true;
  for (const auto &[tag, mat] : materials.regions())
  {
    (void)tag;
    const double *e = std::get_if<double>(&mat.epsilon);
    const double *m = std::get_if<double>(&mat.mu);
    if (!e || !m) return std::nullopt;
    if (first)
    {
      g.eps = *e;
      g.mu = *m;
      first = false;
    }
    else if (*e != g.eps || *m != g.mu)
    {
      return std::nullopt;
    }
  }
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto &p : mesh.nodes())
  {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  g.x0 = x0;
  g.y0 = y0;
  g.a = x1 - x0;
  g.b = y1 - y0;
  const double scale = std::max(g.a, g.b);
  if (std::abs(mesh.total_area() - g.a * g.b) > 1e-12 * g.a * g.b) return std::nullopt;
  auto wall_edge = [&](int a, int b) {
    const Point &p = mesh.nodes()[a], &q = mesh.nodes()[b];
    return (on_segment_line(p.x, x0, scale) && on_segment_line(q.x, x0, scale)) ||
           (on_segment_line(p.x, x1, scale) && on_segment_line(q.x, x1, scale)) ||
           (on_segment_line(p.y, y0, scale) && on_segment_line(q.y, y0, scale)) ||
           (on_segment_line(p.y, y1, scale) && on_segment_line(q.y, y1, scale));
  };
  const auto &et = mesh.edge_table();
  for (std::size_t e = 0; e < et.size(); ++e)
  {
    if (et.incident_count[e] == 1 && !wall_edge(et.edges[e][0], et.edges[e][1])) return std::nullopt;
  }
  for (const auto &be : mesh.boundary_edges())
  {
    if (!wall_edge(be.v[0], be.v[1])) return std::nullopt;
  }
  return g;
}

bool VerifyReport::all_pass() const
{
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.pass; });
}

VerifyReport verify_modes(const Mesh &mesh, const MaterialMap &materials, const SolveOptions &opts,
                          const SolveResult &res)
{
  VerifyReport rep;
  const auto &modes = res.modes;
  const auto &tol = opts.tol;

  {
    const auto o = check_orthogonality(res.blocks, res.omega, modes, tol);
    CheckResult c{"orthogonality", o.pass, o.max_offdiag, tol.orth_tol, ""};
    if (!o.pass)
    {
      c.detail = std::to_string(o.violations.size()) + " pair(s) above tolerance";
    }
    rep.checks.push_back(c);

    double worst = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j)
    {
      if (modes[j].norm_state == NormState::Normalized)
      {
        worst = std::max(worst, std::abs(std::abs(o.matrix(j, j)) - 1.0));
      }
    }
    rep.checks.push_back({"normalization", worst <= 1e-10, worst, 1e-10, "| |a(u,u)| - 1 |"});
  }
  {
    const auto s = spectral_symmetry_check(modes, 1e-8);
    CheckResult c{"spectral_symmetry", s.symmetric, s.max_mismatch, 1e-8, ""};
    if (!s.symmetric) c.detail = std::to_string(s.unmatched.size()) + " unmatched value(s)";
    rep.checks.push_back(c);
  }
  {
    int positive = 0;
    for (const auto &m : modes) positive += m.beta_sq.real() > 0.0;
    const auto s = sector_check(modes, 0.1, positive);
    rep.checks.push_back({"sector", s.pass, static_cast<double>(s.violators.size()),
                          static_cast<double>(positive),
                          std::to_string(s.num_positive_real) + " with Re beta^2 > 0, delta 0.1"});
  }
  {
    bool ok = true;
    for (const auto &m : modes)
    {
      const bool real_pos = m.beta.imag() == 0.0 && m.beta.real() > 0.0;
      const bool upper = m.beta.imag() > tol.real_tol * std::abs(m.beta);
      ok = ok && (real_pos != upper) && std::abs(m.beta * m.beta - m.beta_sq) <= 1e-12 * std::abs(m.beta_sq);
    }
    rep.checks.push_back({"branch_rule", ok, ok ? 0.0 : 1.0, 0.0, ""});
  }
  {
    double worst = 0.0;
    for (const auto &m : modes) worst = std::max(worst, m.schur_residual);
    rep.checks.push_back({"schur_residual", worst <= 1e-6, worst, 1e-6, ""});
  }
  {
    double worst = 0.0;
    for (const auto &m : modes) worst = std::max(worst, axial_recovery_residual(res.blocks, res.omega, m));
    rep.checks.push_back({"axial_recovery", worst <= 1e-6, worst, 1e-6, ""});
  }
  {
    SolveOptions o2 = opts;
    o2.pencil = opts.pencil == PencilKind::Vd1 ? PencilKind::Vd2 : PencilKind::Vd1;
    o2.shift = res.sigma;
    o2.schur = false;
    CheckResult c{"vd1_vs_vd2", true, 0.0, 1e-6, ""};
    try
    {
      const auto other = solve_modes(mesh, materials, o2);
      double worst = 0.0;
      for (const auto &m : modes)
      {
        double best = std::numeric_limits<double>::infinity();
        for (const auto &q : other.modes)
        {
          best = std::min(best, std::abs(q.beta_sq - m.beta_sq) / std::max(std::abs(m.beta_sq), 1.0));
        }
        worst = std::max(worst, best);
      }
      c.value = worst;
      c.pass = worst <= 1e-6;
    }
    catch (const Error &e)
    {
      c.pass = false;
      c.value = std::numeric_limits<double>::infinity();
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  {
    int degenerate = 0;
    for (const auto &cl : res.clusters) degenerate += cl.degenerate;
    rep.checks.push_back({"nondegenerate_clusters", degenerate == 0, static_cast<double>(degenerate),
                          0.0, std::to_string(res.clusters.size()) + " cluster(s)"});
  }
  return rep;
}

void print_report(std::ostream &os, const VerifyReport &report)
{
  for (const auto &c : report.checks)
  {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << fmt("%.3e", c.value)
       << " threshold=" << fmt("%.3e", c.threshold);
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "\n";
  }
}

double max_edge_length(const Mesh &mesh)
{
  double h = 0.0;
  for (const auto &e : mesh.edge_table().edges)
  {
    const Point &p = mesh.nodes()[e[0]], &q = mesh.nodes()[e[1]];
    h = std::max(h, std::hypot(p.x - q.x, p.y - q.y));
  }
  return h;
}

ConvergenceTable convergence_study(const Mesh &mesh, const MaterialMap &materials,
                                   const SolveOptions &opts, int levels, int tracked)
{
  if (levels < 3)
  {
    throw Error(ErrorKind::Validation, "cli", "convergence study needs at least 3 levels");
  }
  const auto rect = detect_rectangle(mesh, materials);
  if (!rect)
  {
    throw Error(ErrorKind::Validation, "cli",
                "convergence study needs a hollow rectangle with constant materials");
  }
  ConvergenceTable tab;
  tab.reference = rect_mode_list(rect->a, rect->b, opts.omega, rect->eps, rect->mu, tracked).modes;
  Mesh current = mesh;
  for (int level = 0; level < levels; ++level)
  {
    if (level > 0) current = refine_uniform(current);
    MaterialMap mats;
    for (const auto &[tag, mat] : materials.regions()) mats.set(tag, mat);
    SolveOptions o = opts;
    o.num_modes = std::max(opts.num_modes, tracked + 2);
    const auto res = solve_modes(current, mats, o);
    ConvergenceRow row;
    row.level = level;
    row.h = max_edge_length(current);
    row.dofs = res.dofs.size();
    for (const auto &ref : tab.reference)
    {
      double best = std::numeric_limits<double>::quiet_NaN();
      for (const auto &m : res.modes)
      {
        if (std::isnan(best) || std::abs(m.beta_sq.real() - ref.beta_sq) < std::abs(best - ref.beta_sq))
        {
          best = m.beta_sq.real();
        }
      }
      row.beta_sq.push_back(best);
      row.error.push_back(std::abs(best - ref.beta_sq));
    }
    for (std::size_t k = 0; k < row.error.size(); ++k)
    {
      double order = std::numeric_limits<double>::quiet_NaN();
      if (!tab.rows.empty())
      {
        const auto &prev = tab.rows.back();
        order = std::log(prev.error[k] / row.error[k]) / std::log(prev.h / row.h);
      }
      row.order.push_back(order);
    }
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

void print_convergence(std::ostream &os, const ConvergenceTable &table)
{
  os << "level,h,dofs";
  for (const auto &r : table.reference)
  {
    const auto l = r.label();
    os << "," << l << "_beta_sq," << l << "_error," << l << "_order";
  }
  os << "\n";
  for (const auto &row : table.rows)
  {
    os << row.level << "," << fmt("%.6g", row.h) << "," << row.dofs;
    for (std::size_t k = 0; k < row.beta_sq.size(); ++k)
    {
      os << "," << fmt("%.12g", row.beta_sq[k]) << "," << fmt("%.6e", row.error[k]) << ","
         << (std::isnan(row.order[k]) ? std::string("-") : fmt("%.4f", row.order[k]));
    }
    os << "\n";
  }
}

void write_mode_table(std::ostream &os, const std::vector<Mode> &modes)
{
  os << "index,re_beta_sq,im_beta_sq,re_beta,im_beta,classification,residual,schur_residual\n";
  for (std::size_t j = 0; j < modes.size(); ++j)
  {
    const auto &m = modes[j];
    os << j << "," << g17(m.beta_sq.real()) << "," << g17(m.beta_sq.imag()) << ","
       << g17(m.beta.real()) << "," << g17(m.beta.imag()) << "," << class_name(m.classification)
       << "," << fmt("%.6e", m.residual) << ","
       << (m.schur_residual < 0.0 ? std::string("nan") : fmt("%.6e", m.schur_residual)) << "\n";
  }
}

void write_mode_table(const std::string &path, const std::vector<Mode> &modes)
{
  std::ostringstream ss;
  write_mode_table(ss, modes);
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << ss.str()))
  {
    throw Error(ErrorKind::Io, "cli", "cannot write mode table '" + path + "'");
  }
}

void export_fields(std::ostream &os, const Mesh &mesh, const DofMap &dofs,
                   const std::vector<Mode> &modes)
{
  const auto nn = mesh.num_nodes();
  const auto nt = mesh.num_triangles();
  os << "# vtk DataFile Version 3.0\n";
  os << "wgmodes mode fields\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (const auto &p : mesh.nodes())
  {
    os << g17(p.x) << " " << g17(p.y) << " 0\n";
  }
  os << "CELLS " << nt << " " << 4 * nt << "\n";
  for (const auto &t : mesh.triangles())
  {
    os << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
  }
  os << "CELL_TYPES " << nt << "\n";
  for (std::size_t t = 0; t < nt; ++t) os << "5\n";
  if (modes.empty()) return;

  const std::array<double, 3> centroid{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  os << "CELL_DATA " << nt << "\n";
  for (std::size_t j = 0; j < modes.size(); ++j)
  {
    std::vector<EdgeFieldSample> s(nt);
    for (std::size_t t = 0; t < nt; ++t) s[t] = evaluate_edge_field(mesh, dofs, modes[j].u, t, centroid);
    for (int part = 0; part < 2; ++part)
    {
      os << "VECTORS E_" << j << (part ? "_imag" : "_real") << " double\n";
      for (std::size_t t = 0; t < nt; ++t)
      {
        const auto &v = s[t].value;
        os << g17(part ? v[0].imag() : v[0].real()) << " " << g17(part ? v[1].imag() : v[1].real())
           << " 0\n";
      }
    }
  }
  os << "POINT_DATA " << nn << "\n";
  for (std::size_t j = 0; j < modes.size(); ++j)
  {
    for (int part = 0; part < 2; ++part)
    {
      os << "SCALARS E3_" << j << (part ? "_imag" : "_real") << " double 1\n";
      os << "LOOKUP_TABLE default\n";
      for (std::size_t n = 0; n < nn; ++n)
      {
        const int d = dofs.vertex_dof[n];
        const Complex v = d < 0 ? Complex(0.0) : modes[j].p[d];
        os << g17(part ? v.imag() : v.real()) << "\n";
      }
    }
  }
}

void export_fields(const std::string &path, const Mesh &mesh, const DofMap &dofs,
                   const std::vector<Mode> &modes)
{
  std::ostringstream ss;
  export_fields(ss, mesh, dofs, modes);
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << ss.str()))
  {
    throw Error(ErrorKind::Io, "cli", "cannot write field file '" + path + "'");
  }
}

}  // namespace wgm
