#ifndef WGM_FEM_HPP
#define WGM_FEM_HPP

#include <array>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wgm/materials.hpp"
#include "wgm/mesh.hpp"
#include "wgm/types.hpp"

namespace wgm
{

// Free degrees of freedom of H0(curl) x H0^1. Mixed vectors store the edge unknowns first,
// then the vertex unknowns: x = [u; p] with u of length n_e and p of length n_v.
struct DofMap
{
  std::vector<int> free_edges;     // global edge ids, ascending
  std::vector<int> free_vertices;  // node ids, ascending
  std::vector<int> edge_dof;       // global edge -> dof, -1 on PEC edges
  std::vector<int> vertex_dof;     // node -> dof, -1 on PEC nodes

  int num_edge_dofs() const { return static_cast<int>(free_edges.size()); }
  int num_vertex_dofs() const { return static_cast<int>(free_vertices.size()); }
  int size() const { return num_edge_dofs() + num_vertex_dofs(); }
};

// Eliminates every edge carrying a PEC tag and every node touching such an edge. Throws if an
// edge with a single incident triangle (outer boundary or crack face) is not PEC tagged.
DofMap build_dofmap(const Mesh &mesh, const std::set<std::string> &pec_tags = {kPecTag});

// Local element matrices. Local edges follow EdgeTable::kLocalEdges, oriented from the lower
// to the higher local vertex.
struct LocalBlocks
{
  Eigen::Matrix3d C;     // <mu^-1 curl phi_j, curl phi_i>
  Eigen::Matrix3d Me;    // <eps phi_j, phi_i>
  Eigen::Matrix3d Mmu;   // <mu^-1 phi_j, phi_i>
  Eigen::Matrix3d G;     // (edge i, vertex k): <mu^-1 grad psi_k, phi_i>
  Eigen::Matrix3d D;     // (vertex k, edge j): -<eps phi_j, grad psi_k>
  Eigen::Matrix3d Gdiv;  // (vertex k, edge j): <mu^-1 phi_j, grad psi_k>
  Eigen::Matrix3d Mv;    // <eps psi_l, psi_k>
  Eigen::Matrix3d Kv;    // <mu^-1 grad psi_l, grad psi_k>
};

// eps and mu are sampled at the 7 points of triangle_rule_deg5().
LocalBlocks local_element_matrices(const std::array<Point, 3> &coords,
                                   std::span<const double, 7> eps,
                                   std::span<const double, 7> mu);

// Global sparse blocks over the free dofs. The D row carries the sign obtained by integrating
// div(eps E) by parts against an H0^1 test function.
struct PencilBlocks
{
  SparseMatrix C, Me, Mmu;  // n_e x n_e
  SparseMatrix G;           // n_e x n_v
  SparseMatrix D, Gdiv;     // n_v x n_e
  SparseMatrix Mv, Kv;      // n_v x n_v

  int num_edge_dofs() const { return static_cast<int>(C.rows()); }
  int num_vertex_dofs() const { return static_cast<int>(Mv.rows()); }
};

PencilBlocks assemble_blocks(const Mesh &mesh, const DofMap &dofs, const MaterialMap &materials,
                             int threads = 1);

// Generalized eigenproblem A x = lambda B x with lambda = beta^2.
struct Pencil
{
  SparseMatrix A, B;
};

// [[C - w^2 Me, G], [D, Mv]] x = beta^2 [[-Mmu, 0], [0, 0]] x
Pencil pencil_vd1(const PencilBlocks &blocks, double omega);

// [[C - w^2 Me, G], [0, -Kv + w^2 Mv]] x = beta^2 [[-Mmu, 0], [Gdiv, 0]] x
Pencil pencil_vd2(const PencilBlocks &blocks, double omega);

// Kv - w^2 Mv, the Dirichlet scalar Helmholtz operator.
SparseMatrix scalar_helmholtz(const PencilBlocks &blocks, double omega);

// C - w^2 Me.
SparseMatrix orth_operator(const PencilBlocks &blocks, double omega);

// y^H (C - w^2 Me) x.
Complex a_orth(const PencilBlocks &blocks, double omega, const VectorXcd &x, const VectorXcd &y);

using VectorField = std::function<std::array<double, 2>(double, double)>;

// Edge coefficients of the H(curl) interpolant: line integral of the tangential component
// along each free edge (3-point Gauss), in global edge orientation.
VectorXd interpolate_hcurl(const Mesh &mesh, const DofMap &dofs, const VectorField &field);

// Discrete gradient: maps free vertex coefficients to the edge coefficients of their gradient.
SparseMatrix gradient_matrix(const Mesh &mesh, const DofMap &dofs);

// Value and curl of the edge-element field u at barycentric point lambda of triangle t.
struct EdgeFieldSample
{
  std::array<Complex, 2> value;
  Complex curl;
};
EdgeFieldSample evaluate_edge_field(const Mesh &mesh, const DofMap &dofs, const VectorXcd &u,
                                    std::size_t t, const std::array<double, 3> &lambda);

}  // namespace wgm

#endif  // WGM_FEM_HPP
