#ifndef WGM_MODES_HPP
#define WGM_MODES_HPP

#include <string>
#include <vector>

#include "wgm/eigensolver.hpp"
#include "wgm/fem.hpp"
#include "wgm/types.hpp"

namespace wgm
{

enum class NormState
{
  Unnormalized,
  Normalized,  // |a_orth(u, u)| = 1, sign recorded in Mode::norm_sign
  Degenerate   // |a_orth(u, u)| ~ 0, scaled to unit 2-norm instead
};

enum class ModeClass
{
  Propagating,  // beta real and positive
  Evanescent,   // beta purely imaginary
  Complex
};

const char *class_name(ModeClass c);

struct ModeTolerances
{
  double real_tol = 1e-8;
  double cluster_tol = 1e-6;
  double orth_tol = 1e-8;
  double degenerate_tol = 1e-10;
};

// Waveguide mode exp(i beta z) of the cross-section problem. u holds the edge coefficients of
// the transverse field, p the vertex coefficients of the scaled axial field i beta E3.
struct Mode
{
  Complex beta_sq;
  Complex beta;
  ModeClass classification = ModeClass::Complex;
  VectorXcd u;
  VectorXcd p;
  double residual = 0.0;        // pencil residual of [u; p]
  double schur_residual = -1.0;  // negative until computed
  NormState norm_state = NormState::Unnormalized;
  int norm_sign = 0;             // sign of a_orth(u, u) once normalized
};

// Square root of beta_sq on the outgoing branch: real positive when |Im beta| <= real_tol |beta|,
// otherwise Im beta > 0.
Complex select_branch(Complex beta_sq, double real_tol = 1e-8);
ModeClass classify(Complex beta, double real_tol = 1e-8);

// Splits a Ritz pair of a mixed pencil into a mode (branch selected, not normalized).
Mode make_mode(const RitzPair &pair, int num_edge_dofs, double real_tol = 1e-8);

// Scales u and p by 1/sqrt|a_orth(u,u)| and rotates the phase so the largest entry of u is real
// and positive. Modes with |a_orth(u,u)| < degenerate_tol |Au| |u| are marked degenerate and
// left at unit 2-norm.
Mode normalize_mode(const PencilBlocks &blocks, double omega, Mode mode,
                    double degenerate_tol = 1e-10);

// Replaces the vectors of a group of modes sharing one real eigenvalue by a real basis of their
// span. Returns false (and leaves the modes untouched) when the span has no real basis of the
// right dimension.
bool make_real_basis(std::vector<Mode> &modes, const std::vector<int> &members);

// O(j, k) = a_orth(u_k, u_j).
MatrixXcd orthogonality_matrix(const PencilBlocks &blocks, double omega,
                               const std::vector<Mode> &modes);

struct OrthogonalityReport
{
  MatrixXcd matrix;
  double max_offdiag = 0.0;  // over pairs that must be orthogonal
  std::vector<std::pair<int, int>> violations;
  bool pass = true;
};
OrthogonalityReport check_orthogonality(const PencilBlocks &blocks, double omega,
                                        const std::vector<Mode> &modes,
                                        const ModeTolerances &tol = {});

// True when beta_j^2 and conj(beta_k^2) coincide within cluster_tol (relative).
bool conjugate_related(Complex beta_sq_j, Complex beta_sq_k, double cluster_tol);

struct ModeCluster
{
  std::vector<int> members;  // mode indices, ascending
  MatrixXcd gram;            // gram(k, l) = a_orth(u_l, u_k) over members
  bool degenerate = false;   // singular Gram matrix
};

// Transitive closure of conjugate_related; every mode lands in exactly one cluster.
std::vector<ModeCluster> detect_clusters(const PencilBlocks &blocks, double omega,
                                         const std::vector<Mode> &modes,
                                         const ModeTolerances &tol = {});

// Residual of the Schur-complement form (E3 eliminated through the scalar Helmholtz solve):
//   r = (C - w^2 Me) u + beta^2 (Mmu u + Gdiv^T s),  (Kv - w^2 Mv) s = -Gdiv u,
// returned as ||r|| / ||u||.
class SchurResidual
{
public:
  SchurResidual(const PencilBlocks &blocks, double omega);
  double operator()(const Mode &mode) const;

private:
  const PencilBlocks &blocks_;
  double omega_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};
double schur_residual(const PencilBlocks &blocks, double omega, const Mode &mode);

// E3 = p / (i beta) inserted into the weak axial equation
// (-Kv + w^2 Mv) E3 + i beta Gdiv u = 0; relative residual.
double axial_recovery_residual(const PencilBlocks &blocks, double omega, const Mode &mode);

struct SymmetryReport
{
  bool symmetric = true;
  std::vector<int> unmatched;
  double max_mismatch = 0.0;
};
// Checks that the multiset {beta_j^2} is closed under complex conjugation.
SymmetryReport spectral_symmetry_check(const std::vector<Complex> &beta_sq, double tol = 1e-8);
SymmetryReport spectral_symmetry_check(const std::vector<Mode> &modes, double tol = 1e-8);

struct SectorReport
{
  bool pass = true;
  std::vector<int> violators;  // |arg beta^2 -+ pi| >= delta
  int num_positive_real = 0;   // Re beta^2 > 0
};
SectorReport sector_check(const std::vector<Complex> &beta_sq, double delta, int count_exempt);
SectorReport sector_check(const std::vector<Mode> &modes, double delta, int count_exempt);

std::vector<Complex> beta_squares(const std::vector<Mode> &modes);

}  // namespace wgm

#endif  // WGM_MODES_HPP
