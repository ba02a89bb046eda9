#ifndef WGM_EIGENSOLVER_HPP
#define WGM_EIGENSOLVER_HPP

#include <cstdint>
#include <vector>

#include "wgm/fem.hpp"
#include "wgm/types.hpp"

namespace wgm
{

// Approximate eigenpair of A x = lambda B x.
struct RitzPair
{
  Complex lambda;
  VectorXcd vector;  // unit 2-norm
  double residual;   // ||A x - lambda B x|| / ||x||
};

struct ArnoldiOptions
{
  int nev = 10;
  int krylov_dim = 0;  // 0: max(2 nev + 10, 30), clamped to the problem size
  double tol = 1e-12;  // Ritz pair accepted when ||OP y - theta y|| <= tol |theta|
  int max_restarts = 300;
  double theta_floor = 1e-10;  // relative to max |theta|; below it theta counts as zero
  std::uint64_t seed = 0x5eed;
};

// Eigenvalues of A x = lambda B x nearest to sigma, via Krylov-Schur restarted Arnoldi on
// OP = (A - sigma B)^-1 B with a sparse LU factorization. Eigenvalues come back as
// lambda = sigma + 1/theta; theta below the floor belong to the null space of B (infinite
// eigenvalues) and are dropped. Results are sorted by |lambda - sigma|.
std::vector<RitzPair> shift_invert_arnoldi(const ComplexSparseMatrix &A,
                                           const ComplexSparseMatrix &B, Complex sigma,
                                           const ArnoldiOptions &opts = {});
std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix &A, const SparseMatrix &B,
                                           Complex sigma, const ArnoldiOptions &opts = {});

// All finite eigenvalues from a dense eigendecomposition of (A - sigma B)^-1 B, sorted by
// |lambda - sigma|. Refuses problems larger than max_dim.
std::vector<Complex> dense_oracle_eigs(const SparseMatrix &A, const SparseMatrix &B,
                                       Complex sigma, int max_dim = 2000,
                                       double theta_floor = 1e-10);

double pencil_residual(const SparseMatrix &A, const SparseMatrix &B, Complex lambda,
                       const VectorXcd &x);

// min_k |w_k^2 - w^2| / w^2 over Dirichlet eigenvalues w_k^2 of (Kv, Mv) near w^2. Returns 0
// when Kv - w^2 Mv is exactly singular and +inf when there are no vertex dofs.
double cutoff_distance(const PencilBlocks &blocks, double omega, int nev = 3);

namespace detail
{

// Reorders the complex Schur form H = Q T Q^H so that the diagonal of T is sorted by
// decreasing magnitude (stable for ties) in the first `count` positions.
void sort_schur_by_magnitude(MatrixXcd &T, MatrixXcd &Q, int count);

// Unit eigenvector of upper triangular T for the eigenvalue T(i, i).
VectorXcd triangular_eigenvector(const MatrixXcd &T, int i);

}  // namespace detail

}  // namespace wgm

#endif  // WGM_EIGENSOLVER_HPP
