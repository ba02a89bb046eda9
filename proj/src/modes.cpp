#include "wgm/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

double rel_scale(Complex z) { return std::max(std::abs(z), 1.0); }

void phase_fix(VectorXcd &u, VectorXcd &p)
{
  if (u.size() == 0)
  {
    return;
  }
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
  {
    // Strict comparison with a relative margin keeps the choice stable under roundoff.
    if (std::abs(u[i]) > best * (1.0 + 1e-10))
    {
      best = std::abs(u[i]);
      imax = i;
    }
  }
  if (best <= 0.0)
  {
    return;
  }
  const Complex rot = std::conj(u[imax]) / best;
  u *= rot;
  p *= rot;
  u[imax] = Complex(u[imax].real(), 0.0);
}

int find_root(std::vector<int> &parent, int i)
{
  while (parent[i] != i)
  {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

const char *class_name(ModeClass c)
{
  switch (c)
  {
    case ModeClass::Propagating:
      return "propagating";
    case ModeClass::Evanescent:
      return "evanescent";
    case ModeClass::Complex:
      return "complex";
  }
  return "complex";
}

Complex select_branch(Complex beta_sq, double real_tol)
{
  if (beta_sq == Complex(0.0, 0.0))
  {
    throw Error(ErrorKind::Validation, "modes", "select_branch: beta^2 = 0 (cutoff)");
  }
  Complex beta = std::sqrt(beta_sq);  // principal root, Re >= 0
  if (std::abs(beta.imag()) <= real_tol * std::abs(beta))
  {
    return Complex(std::abs(beta.real()), 0.0);
  }
  if (beta.imag() < 0.0)
  {
    beta = -beta;
  }
  return beta;
}

ModeClass classify(Complex beta, double real_tol)
{
  const double mag = std::abs(beta);
  if (beta.imag() == 0.0 && beta.real() > 0.0)
  {
    return ModeClass::Propagating;
  }
  if (std::abs(beta.real()) <= real_tol * mag)
  {
    return ModeClass::Evanescent;
  }
  return ModeClass::Complex;
}

Mode make_mode(const RitzPair &pair, int num_edge_dofs, double real_tol)
{
  Mode m;
  m.beta_sq = pair.lambda;
  m.beta = select_branch(pair.lambda, real_tol);
  m.classification = classify(m.beta, real_tol);
  m.u = pair.vector.head(num_edge_dofs);
  m.p = pair.vector.tail(pair.vector.size() - num_edge_dofs);
  m.residual = pair.residual;
  return m;
}

Mode normalize_mode(const PencilBlocks &blocks, double omega, Mode mode, double degenerate_tol)
{
  const double unorm = mode.u.norm();
  if (unorm == 0.0)
  {
    throw Error(ErrorKind::Validation, "modes", "normalize_mode: zero edge vector");
  }
  const VectorXcd au = blocks.C.cast<Complex>() * mode.u - (omega * omega) * (blocks.Me.cast<Complex>() * mode.u);
  const Complex a = mode.u.dot(au);
  // |a| is bounded by |Au| |u|; compare against that
  if (std::abs(a) < degenerate_tol * au.norm() * unorm)
  {
    mode.u /= unorm;
    mode.p /= unorm;
    mode.norm_state = NormState::Degenerate;
    mode.norm_sign = 0;
  }
  else
  {
    const double s = 1.0 / std::sqrt(std::abs(a));
    mode.u *= s;
    mode.p *= s;
    mode.norm_state = NormState::Normalized;
    mode.norm_sign = a.real() >= 0.0 ? 1 : -1;
  }
  phase_fix(mode.u, mode.p);
  return mode;
}

bool make_real_basis(std::vector<Mode> &modes, const std::vector<int> &members)
{
  const int k = static_cast<int>(members.size());
  if (k == 0)
  {
    return true;
  }
  const Eigen::Index ne = modes[members[0]].u.size();
  const Eigen::Index nv = modes[members[0]].p.size();
  MatrixXd R(ne + nv, 2 * k);
  for (int c = 0; c < k; ++c)
  {
    const Mode &m = modes[members[c]];
    VectorXcd x(ne + nv);
    x << m.u, m.p;
    R.col(c) = x.real();
    R.col(k + c) = x.imag();
  }
  Eigen::JacobiSVD<MatrixXd> svd(R, Eigen::ComputeThinU);
  const VectorXd &sv = svd.singularValues();
  if (sv[0] == 0.0 || sv[k - 1] <= 1e-8 * sv[0] || sv[k] > 1e-8 * sv[0])
  {
    return false;
  }
  double mean = 0.0;
  for (int idx : members)
  {
    mean += modes[idx].beta_sq.real();
  }
  mean /= k;
  for (int c = 0; c < k; ++c)
  {
    VectorXd x = svd.matrixU().col(c);
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    if (x[imax] < 0.0)
    {
      x = -x;
    }
    Mode &m = modes[members[c]];
    m.u = x.head(ne).cast<Complex>();
    m.p = x.tail(nv).cast<Complex>();
    m.beta_sq = Complex(mean, 0.0);
  }
  return true;
}

MatrixXcd orthogonality_matrix(const PencilBlocks &blocks, double omega,
                               const std::vector<Mode> &modes)
{
  const int n = static_cast<int>(modes.size());
  const SparseMatrix A = orth_operator(blocks, omega);
  MatrixXcd W(A.rows(), n);
  MatrixXcd U(A.rows(), n);
  for (int k = 0; k < n; ++k)
  {
    U.col(k) = modes[k].u;
    W.col(k) = A * modes[k].u;
  }
  return U.adjoint() * W;  // (j, k) = u_j^H A u_k
}

OrthogonalityReport check_orthogonality(const PencilBlocks &blocks, double omega,
                                        const std::vector<Mode> &modes,
                                        const ModeTolerances &tol)
{
  OrthogonalityReport rep;
  rep.matrix = orthogonality_matrix(blocks, omega, modes);
  const int n = static_cast<int>(modes.size());
  for (int j = 0; j < n; ++j)
  {
    for (int k = 0; k < n; ++k)
    {
      if (j == k || conjugate_related(modes[j].beta_sq, modes[k].beta_sq, tol.cluster_tol))
      {
        continue;
      }
      const double v = std::abs(rep.matrix(j, k));
      rep.max_offdiag = std::max(rep.max_offdiag, v);
      if (v > tol.orth_tol)
      {
        rep.violations.emplace_back(j, k);
      }
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

bool conjugate_related(Complex beta_sq_j, Complex beta_sq_k, double cluster_tol)
{
  return std::abs(beta_sq_j - std::conj(beta_sq_k)) <= cluster_tol * rel_scale(beta_sq_j);
}

std::vector<ModeCluster> detect_clusters(const PencilBlocks &blocks, double omega,
                                         const std::vector<Mode> &modes,
                                         const ModeTolerances &tol)
{
  const int n = static_cast<int>(modes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int j = 0; j < n; ++j)
  {
    for (int k = j + 1; k < n; ++k)
    {
      if (conjugate_related(modes[j].beta_sq, modes[k].beta_sq, tol.cluster_tol) ||
          conjugate_related(modes[k].beta_sq, modes[j].beta_sq, tol.cluster_tol))
      {
        const int rj = find_root(parent, j), rk = find_root(parent, k);
        parent[std::max(rj, rk)] = std::min(rj, rk);
      }
    }
  }
  std::vector<ModeCluster> clusters;
  std::vector<int> slot(n, -1);
  for (int j = 0; j < n; ++j)
  {
    const int r = find_root(parent, j);
    if (slot[r] < 0)
    {
      slot[r] = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    clusters[slot[r]].members.push_back(j);
  }

  const SparseMatrix A = orth_operator(blocks, omega);
  for (auto &cl : clusters)
  {
    const int m = static_cast<int>(cl.members.size());
    MatrixXcd U(A.rows(), m), W(A.rows(), m);
    double scale = 0.0;
    for (int c = 0; c < m; ++c)
    {
      U.col(c) = modes[cl.members[c]].u;
      W.col(c) = A * U.col(c);
      scale = std::max(scale, W.col(c).norm() * U.col(c).norm());
    }
    cl.gram = U.adjoint() * W;
    Eigen::JacobiSVD<MatrixXcd> svd(cl.gram);
    const VectorXd &sv = svd.singularValues();
    cl.degenerate = scale == 0.0 || sv[m - 1] <= tol.degenerate_tol * scale;
  }
  return clusters;
}

SchurResidual::SchurResidual(const PencilBlocks &blocks, double omega)
  : blocks_(blocks), omega_(omega)
{
  if (blocks.num_vertex_dofs() == 0)
  {
    return;
  }
  SparseMatrix H = scalar_helmholtz(blocks, omega);
  H.makeCompressed();
  lu_.compute(H);
  if (lu_.info() != Eigen::Success)
  {
    throw Error(ErrorKind::Solver, "modes",
                "schur_residual: scalar Helmholtz factorization failed: " + lu_.lastErrorMessage());
  }
}

double SchurResidual::operator()(const Mode &mode) const
{
  const double unorm = mode.u.norm();
  if (unorm == 0.0)
  {
    return std::numeric_limits<double>::infinity();
  }
  VectorXcd r = orth_operator(blocks_, omega_) * mode.u + mode.beta_sq * (blocks_.Mmu * mode.u);
  if (blocks_.num_vertex_dofs() > 0)
  {
    const VectorXcd rhs = -(blocks_.Gdiv * mode.u);
    const VectorXd sr = lu_.solve(VectorXd(rhs.real()));
    const VectorXd si = lu_.solve(VectorXd(rhs.imag()));
    const VectorXcd s = sr.cast<Complex>() + Complex(0.0, 1.0) * si.cast<Complex>();
    r += mode.beta_sq * (blocks_.Gdiv.transpose() * s);
  }
  return r.norm() / unorm;
}

double schur_residual(const PencilBlocks &blocks, double omega, const Mode &mode)
{
  return SchurResidual(blocks, omega)(mode);
}

double axial_recovery_residual(const PencilBlocks &blocks, double omega, const Mode &mode)
{
  const Complex ib = Complex(0.0, 1.0) * mode.beta;
  if (ib == Complex(0.0, 0.0))
  {
    throw Error(ErrorKind::Validation, "modes", "axial recovery needs beta != 0");
  }
  if (blocks.num_vertex_dofs() == 0)
  {
    return 0.0;
  }
  const VectorXcd e3 = mode.p / ib;
  const VectorXcd h = -(scalar_helmholtz(blocks, omega) * e3);
  const VectorXcd g = ib * (blocks.Gdiv * mode.u);
  const double denom = h.norm() + std::abs(mode.beta) * mode.u.norm();
  return denom == 0.0 ? 0.0 : (h + g).norm() / denom;
}

SymmetryReport spectral_symmetry_check(const std::vector<Complex> &beta_sq, double tol)
{
  SymmetryReport rep;
  const int n = static_cast<int>(beta_sq.size());
  std::vector<bool> used(n, false);
  for (int j = 0; j < n; ++j)
  {
    if (used[j])
    {
      continue;
    }
    const double scale = rel_scale(beta_sq[j]);
    if (std::abs(beta_sq[j].imag()) <= 0.5 * tol * scale)
    {
      used[j] = true;
      rep.max_mismatch = std::max(rep.max_mismatch, 2.0 * std::abs(beta_sq[j].imag()) / scale);
      continue;
    }
    int best = -1;
    double best_d = 0.0;
    for (int k = 0; k < n; ++k)
    {
      if (k == j || used[k])
      {
        continue;
      }
      const double d = std::abs(beta_sq[j] - std::conj(beta_sq[k])) / scale;
      if (best < 0 || d < best_d)
      {
        best = k;
        best_d = d;
      }
    }
    used[j] = true;
    if (best >= 0 && best_d <= tol)
    {
      used[best] = true;
      rep.max_mismatch = std::max(rep.max_mismatch, best_d);
    }
    else
    {
      rep.unmatched.push_back(j);
    }
  }
  rep.symmetric = rep.unmatched.empty();
  return rep;
}

SymmetryReport spectral_symmetry_check(const std::vector<Mode> &modes, double tol)
{
  return spectral_symmetry_check(beta_squares(modes), tol);
}

SectorReport sector_check(const std::vector<Complex> &beta_sq, double delta, int count_exempt)
{
  SectorReport rep;
  for (int j = 0; j < static_cast<int>(beta_sq.size()); ++j)
  {
    if (beta_sq[j].real() > 0.0)
    {
      ++rep.num_positive_real;
    }
    const double dist = std::numbers::pi - std::abs(std::arg(beta_sq[j]));
    if (dist > delta)
    {
      rep.violators.push_back(j);
    }
  }
  rep.pass = static_cast<int>(rep.violators.size()) <= count_exempt;
  return rep;
}

SectorReport sector_check(const std::vector<Mode> &modes, double delta, int count_exempt)
{
  return sector_check(beta_squares(modes), delta, count_exempt);
}

std::vector<Complex> beta_squares(const std::vector<Mode> &modes)
{
  std::vector<Complex> out;
  out.reserve(modes.size());
  for (const auto &m : modes)
  {
    out.push_back(m.beta_sq);
  }
  return out;
}

}  // namespace wgm
