#include "wgm/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

constexpr double kEps = std::numeric_limits<double>::epsilon();

class ShiftInvertOperator
{
public:
  ShiftInvertOperator(const ComplexSparseMatrix &A, const ComplexSparseMatrix &B, Complex sigma)
    : B_(B)
  {
    ComplexSparseMatrix K = A - sigma * B;
    K.makeCompressed();
    lu_.analyzePattern(K);
    lu_.factorize(K);
    if (lu_.info() != Eigen::Success)
    {
      std::ostringstream msg;
      msg << "factorization of A - sigma B failed at sigma = " << sigma
          << " (sigma hits the spectrum; perturb the shift)";
      throw Error(ErrorKind::Solver, "eigen", msg.str());
    }
  }

  VectorXcd apply(const VectorXcd &x) const
  {
    VectorXcd bx = B_ * x;
    return lu_.solve(bx);
  }

private:
  const ComplexSparseMatrix &B_;
  Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

// Portable uniform numbers in [-0.5, 0.5).
VectorXcd random_vector(Eigen::Index n, std::mt19937_64 &rng)
{
  VectorXcd v(n);
  auto u = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const double re = u();
    const double im = u();
    v[i] = Complex(re, im);
  }
  return v;
}

bool closer_to_shift(Complex a, Complex b, Complex sigma)
{
  const double da = std::abs(a - sigma), db = std::abs(b - sigma);
  if (da != db) return da < db;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// ZLARTG: real c, complex s with [c s; -conj(s) c] [f; g] = [r; 0].
void givens(Complex f, Complex g, double &c, Complex &s)
{
  const double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0)
  {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (af == 0.0)
  {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  const double norm = std::hypot(af, ag);
  c = af / norm;
  s = (f / af) * std::conj(g) / norm;
}

// ZROT on two vectors: x <- c x + s y, y <- c y - conj(s) x.
template <typename X, typename Y>
void rotate(X &&x, Y &&y, double c, Complex s)
{
  for (Eigen::Index i = 0; i < x.size(); ++i)
  {
    const Complex xi = x[i], yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = c * yi - std::conj(s) * xi;
  }
}

// Swaps diagonal entries k and k+1 of the upper triangular T (LAPACK ZTREXC step).
void swap_schur(MatrixXcd &T, MatrixXcd &Q, int k)
{
  const Eigen::Index n = T.rows();
  const Complex t11 = T(k, k), t22 = T(k + 1, k + 1);
  double c;
  Complex s;
  givens(T(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n)
  {
    auto rk = T.row(k).tail(n - k - 2);
    auto rk1 = T.row(k + 1).tail(n - k - 2);
    rotate(rk, rk1, c, s);
  }
  {
    auto ck = T.col(k).head(k);
    auto ck1 = T.col(k + 1).head(k);
    rotate(ck, ck1, c, std::conj(s));
  }
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  auto qk = Q.col(k);
  auto qk1 = Q.col(k + 1);
  rotate(qk, qk1, c, std::conj(s));
}

}  // namespace

namespace detail
{

void sort_schur_by_magnitude(MatrixXcd &T, MatrixXcd &Q, int count)
{
  const int n = static_cast<int>(T.rows());
  count = std::min(count, n);
  for (int target = 0; target < count; ++target)
  {
    int best = target;
    for (int i = target + 1; i < n; ++i)
    {
      if (std::abs(T(i, i)) > std::abs(T(best, best)))
      {
        best = i;
      }
    }
    for (int i = best - 1; i >= target; --i)
    {
      swap_schur(T, Q, i);
    }
  }
}

VectorXcd triangular_eigenvector(const MatrixXcd &T, int i)
{
  VectorXcd y = VectorXcd::Zero(T.rows());
  y[i] = 1.0;
  const double small = std::max(kEps * std::abs(T(i, i)), std::numeric_limits<double>::min());
  for (int j = i - 1; j >= 0; --j)
  {
    Complex sum = 0.0;
    for (int l = j + 1; l <= i; ++l)
    {
      sum += T(j, l) * y[l];
    }
    Complex denom = T(j, j) - T(i, i);
    if (std::abs(denom) < small)
    {
      denom = small;
    }
    y[j] = -sum / denom;
  }
  return y.normalized();
}

}  // namespace detail

double pencil_residual(const SparseMatrix &A, const SparseMatrix &B, Complex lambda,
                       const VectorXcd &x)
{
  VectorXcd r = A.cast<Complex>() * x - lambda * (B.cast<Complex>() * x);
  return r.norm() / x.norm();
}

std::vector<RitzPair> shift_invert_arnoldi(const SparseMatrix &A, const SparseMatrix &B,
                                           Complex sigma, const ArnoldiOptions &opts)
{
  return shift_invert_arnoldi(ComplexSparseMatrix(A.cast<Complex>()),
                              ComplexSparseMatrix(B.cast<Complex>()), sigma, opts);
}

std::vector<RitzPair> shift_invert_arnoldi(const ComplexSparseMatrix &A,
                                           const ComplexSparseMatrix &B, Complex sigma,
                                           const ArnoldiOptions &opts)
{
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n)
  {
    throw Error(ErrorKind::Solver, "eigen", "pencil matrices must be square and of equal size");
  }
  if (opts.nev < 1)
  {
    throw Error(ErrorKind::Solver, "eigen", "nev must be positive");
  }
  if (n == 0)
  {
    return {};
  }
  ShiftInvertOperator op(A, B, sigma);
  std::mt19937_64 rng(opts.seed);

  int m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * opts.nev + 10, 30);
  if (m <= opts.nev && opts.krylov_dim > 0)
  {
    throw Error(ErrorKind::Solver, "eigen", "krylov_dim must exceed nev");
  }
  m = static_cast<int>(std::min<Eigen::Index>(m, n));
  const int nev = std::min(opts.nev, m);

  MatrixXcd V = MatrixXcd::Zero(n, m + 1);
  MatrixXcd H = MatrixXcd::Zero(m + 1, m);

  // Two applications of OP push the start vector into the range of OP, away from the null
  // space of B.
  VectorXcd v0 = op.apply(op.apply(random_vector(n, rng)));
  if (v0.norm() == 0.0)
  {
    v0 = random_vector(n, rng);
  }
  V.col(0) = v0.normalized();

  auto orthogonalize = [&](VectorXcd &w, int cols, VectorXcd &h) {
    h = V.leftCols(cols).adjoint() * w;
    w -= V.leftCols(cols) * h;
    VectorXcd h2 = V.leftCols(cols).adjoint() * w;
    w -= V.leftCols(cols) * h2;
    h += h2;
  };

  int k = 0;
  MatrixXcd T, Q;
  Eigen::RowVectorXcd coupling;
  std::vector<double> residuals(nev, 0.0);
  bool converged = false;
  for (int restart = 0; restart <= opts.max_restarts; ++restart)
  {
    for (int j = k; j < m; ++j)
    {
      VectorXcd w = op.apply(V.col(j));
      VectorXcd h;
      orthogonalize(w, j + 1, h);
      H.col(j).head(j + 1) = h;
      const double beta = w.norm();
      if (beta <= 1e-13 * std::max(h.norm(), 1e-300) || j + 1 == n)
      {
        // Invariant subspace: continue with a fresh direction, decoupled from the rest.
        H(j + 1, j) = 0.0;
        if (j + 1 < n)
        {
          VectorXcd r = random_vector(n, rng);
          VectorXcd hr;
          orthogonalize(r, j + 1, hr);
          V.col(j + 1) = r.normalized();
        }
        else
        {
          V.col(j + 1).setZero();
        }
      }
      else
      {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<MatrixXcd> schur(H.topRows(m));
    T = schur.matrixT();
    Q = schur.matrixU();
    detail::sort_schur_by_magnitude(T, Q, m);
    coupling = H.row(m) * Q;

    int nconv = 0;
    for (int i = 0; i < nev; ++i)
    {
      VectorXcd y = detail::triangular_eigenvector(T, i);
      residuals[i] = std::abs((coupling * y).value());
      if (residuals[i] <= opts.tol * std::abs(T(i, i)))
      {
        ++nconv;
      }
    }
    if (nconv >= nev)
    {
      converged = true;
      break;
    }
    if (restart == opts.max_restarts)
    {
      break;
    }
    const int p = std::min(m - 1, nev + (m - nev) / 2);
    MatrixXcd Vp = V.leftCols(m) * Q.leftCols(p);
    V.leftCols(p) = Vp;
    V.col(p) = V.col(m);
    H.setZero();
    H.topLeftCorner(p, p) = T.topLeftCorner(p, p).triangularView<Eigen::Upper>();
    H.row(p).head(p) = coupling.head(p);
    k = p;
  }
  if (!converged)
  {
    std::ostringstream msg;
    msg << "shift-invert Arnoldi did not converge after " << opts.max_restarts
        << " restarts; achieved residuals:";
    for (int i = 0; i < nev; ++i)
    {
      msg << " " << residuals[i] / std::max(std::abs(T(i, i)), 1e-300);
    }
    throw Error(ErrorKind::Solver, "eigen", msg.str());
  }

  double theta_max = 0.0;
  for (int i = 0; i < m; ++i)
  {
    theta_max = std::max(theta_max, std::abs(T(i, i)));
  }
  std::vector<RitzPair> out;
  for (int i = 0; i < nev; ++i)
  {
    const Complex theta = T(i, i);
    if (std::abs(theta) <= opts.theta_floor * theta_max)
    {
      continue;
    }
    VectorXcd x = V.leftCols(m) * (Q * detail::triangular_eigenvector(T, i));
    // Purification: one more application of OP removes null-space components of B.
    x = op.apply(x);
    x.normalize();
    const Complex lambda = sigma + 1.0 / theta;
    VectorXcd r = A * x - lambda * (B * x);
    out.push_back({lambda, std::move(x), r.norm()});
  }
  std::stable_sort(out.begin(), out.end(), [sigma](const RitzPair &a, const RitzPair &b) {
    return closer_to_shift(a.lambda, b.lambda, sigma);
  });
  return out;
}

std::vector<Complex> dense_oracle_eigs(const SparseMatrix &A, const SparseMatrix &B,
                                       Complex sigma, int max_dim, double theta_floor)
{
  const Eigen::Index n = A.rows();
  if (n > max_dim)
  {
    throw Error(ErrorKind::Solver, "eigen",
                "dense oracle refused: dimension " + std::to_string(n) + " exceeds cap " +
                    std::to_string(max_dim));
  }
  if (n == 0)
  {
    return {};
  }
  MatrixXcd K = MatrixXcd(A.cast<Complex>()) - sigma * MatrixXcd(B.cast<Complex>());
  Eigen::PartialPivLU<MatrixXcd> lu(K);
  if (!(lu.rcond() > 1e3 * kEps))
  {
    throw Error(ErrorKind::Solver, "eigen", "dense oracle: A - sigma B is singular");
  }
  MatrixXcd M = lu.solve(MatrixXcd(B.cast<Complex>()));
  Eigen::ComplexEigenSolver<MatrixXcd> es(M, false);
  if (es.info() != Eigen::Success)
  {
    throw Error(ErrorKind::Solver, "eigen", "dense eigenvalue iteration failed");
  }
  const VectorXcd theta = es.eigenvalues();
  const double theta_max = theta.cwiseAbs().maxCoeff();
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
  {
    if (std::abs(theta[i]) > theta_floor * theta_max)
    {
      out.push_back(sigma + 1.0 / theta[i]);
    }
  }
  std::sort(out.begin(), out.end(),
            [sigma](Complex a, Complex b) { return closer_to_shift(a, b, sigma); });
  return out;
}

double cutoff_distance(const PencilBlocks &blocks, double omega, int nev)
{
  const int nv = blocks.num_vertex_dofs();
  if (nv == 0)
  {
    return std::numeric_limits<double>::infinity();
  }
  const double w2 = omega * omega;
  std::vector<Complex> lambdas;
  try
  {
    ArnoldiOptions opts;
    opts.nev = std::min(nev, nv);
    for (const auto &p : shift_invert_arnoldi(blocks.Kv, blocks.Mv, Complex(w2), opts))
    {
      lambdas.push_back(p.lambda);
    }
  }
  catch (const Error &e)
  {
    if (e.kind() == ErrorKind::Solver && std::string(e.what()).find("factorization") == 0)
    {
      return 0.0;
    }
    throw;
  }
  double best = std::numeric_limits<double>::infinity();
  for (Complex l : lambdas)
  {
    best = std::min(best, std::abs(l - w2) / w2);
  }
  return best;
}

}  // namespace wgm
