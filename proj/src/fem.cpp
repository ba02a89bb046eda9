#include "wgm/fem.hpp"

#include <algorithm>
#include <thread>

#include "wgm/error.hpp"
#include "wgm/quadrature.hpp"

namespace wgm
{

namespace
{

using Vec2 = Eigen::Vector2d;

// Gradients of the barycentric coordinates of a triangle.
std::array<Vec2, 3> barycentric_gradients(const std::array<Point, 3> &p, double area)
{
  const double s = 1.0 / (2.0 * area);
  return {Vec2((p[1].y - p[2].y) * s, (p[2].x - p[1].x) * s),
          Vec2((p[2].y - p[0].y) * s, (p[0].x - p[2].x) * s),
          Vec2((p[0].y - p[1].y) * s, (p[1].x - p[0].x) * s)};
}

double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

double coefficient_at(const Coefficient &c, const std::array<int, 3> &v,
                      const std::array<double, 3> &lambda)
{
  if (const auto *val = std::get_if<double>(&c))
  {
    return *val;
  }
  const auto &f = std::get<NodalField>(c).values;
  return lambda[0] * f[v[0]] + lambda[1] * f[v[1]] + lambda[2] * f[v[2]];
}

struct TripletSet
{
  using T = Eigen::Triplet<double>;
  std::vector<T> C, Me, Mmu, G, D, Gdiv, Mv, Kv;

  void append(const TripletSet &o)
  {
    auto cat = [](std::vector<T> &a, const std::vector<T> &b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    cat(C, o.C);
    cat(Me, o.Me);
    cat(Mmu, o.Mmu);
    cat(G, o.G);
    cat(D, o.D);
    cat(Gdiv, o.Gdiv);
    cat(Mv, o.Mv);
    cat(Kv, o.Kv);
  }
};

void assemble_range(const Mesh &mesh, const DofMap &dofs, const MaterialMap &materials,
                    std::size_t begin, std::size_t end, TripletSet &out)
{
  const auto &rule = triangle_rule_deg5();
  const auto &table = mesh.edge_table();
  for (std::size_t t = begin; t < end; ++t)
  {
    const auto &tri = mesh.triangles()[t];
    const auto &mat = materials.at(tri.region);
    std::array<double, 7> eps{}, mu{};
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      eps[q] = coefficient_at(mat.epsilon, tri.v, rule[q].lambda);
      mu[q] = coefficient_at(mat.mu, tri.v, rule[q].lambda);
    }
    const LocalBlocks lb = local_element_matrices(mesh.triangle_coords(t), eps, mu);

    std::array<int, 3> ed{}, vd{};
    std::array<double, 3> sg{};
    for (int k = 0; k < 3; ++k)
    {
      ed[k] = dofs.edge_dof[table.tri_edges[t][k]];
      sg[k] = table.tri_signs[t][k];
      vd[k] = dofs.vertex_dof[tri.v[k]];
    }
    for (int i = 0; i < 3; ++i)
    {
      for (int j = 0; j < 3; ++j)
      {
        if (ed[i] >= 0 && ed[j] >= 0)
        {
          const double s = sg[i] * sg[j];
          out.C.emplace_back(ed[i], ed[j], s * lb.C(i, j));
          out.Me.emplace_back(ed[i], ed[j], s * lb.Me(i, j));
          out.Mmu.emplace_back(ed[i], ed[j], s * lb.Mmu(i, j));
        }
        if (ed[i] >= 0 && vd[j] >= 0)
        {
          out.G.emplace_back(ed[i], vd[j], sg[i] * lb.G(i, j));
        }
        if (vd[i] >= 0 && ed[j] >= 0)
        {
          out.D.emplace_back(vd[i], ed[j], sg[j] * lb.D(i, j));
          out.Gdiv.emplace_back(vd[i], ed[j], sg[j] * lb.Gdiv(i, j));
        }
        if (vd[i] >= 0 && vd[j] >= 0)
        {
          out.Mv.emplace_back(vd[i], vd[j], lb.Mv(i, j));
          out.Kv.emplace_back(vd[i], vd[j], lb.Kv(i, j));
        }
      }
    }
  }
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Eigen::Triplet<double>> &t)
{
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Stacks a 2x2 block operator into one sparse matrix.
SparseMatrix block2x2(const SparseMatrix &a11, const SparseMatrix &a12, const SparseMatrix &a21,
                      const SparseMatrix &a22, int n1, int n2)
{
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a11.nonZeros() + a12.nonZeros() + a21.nonZeros() + a22.nonZeros());
  auto add = [&t](const SparseMatrix &m, int r0, int c0) {
    for (int k = 0; k < m.outerSize(); ++k)
    {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      {
        t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      }
    }
  };
  if (a11.size() > 0) add(a11, 0, 0);
  if (a12.size() > 0) add(a12, 0, n1);
  if (a21.size() > 0) add(a21, n1, 0);
  if (a22.size() > 0) add(a22, n1, n1);
  return from_triplets(n1 + n2, n1 + n2, t);
}

}  // namespace

DofMap build_dofmap(const Mesh &mesh, const std::set<std::string> &pec_tags)
{
  if (pec_tags.empty())
  {
    throw Error(ErrorKind::Validation, "fem", "PEC tag set must not be empty");
  }
  const auto &table = mesh.edge_table();
  std::vector<char> pec_edge(table.size(), 0), pec_node(mesh.num_nodes(), 0);
  for (const auto &be : mesh.boundary_edges())
  {
    if (pec_tags.count(be.tag))
    {
      pec_edge[table.find(be.v[0], be.v[1])] = 1;
      pec_node[be.v[0]] = pec_node[be.v[1]] = 1;
    }
  }
  for (std::size_t e = 0; e < table.size(); ++e)
  {
    if (table.incident_count[e] == 1 && !pec_edge[e])
    {
      throw Error(ErrorKind::Validation, "fem",
                  "boundary edge (" + std::to_string(table.edges[e][0]) + "," +
                      std::to_string(table.edges[e][1]) +
                      ") is not PEC tagged; the domain must be enclosed");
    }
  }
  DofMap dofs;
  dofs.edge_dof.assign(table.size(), -1);
  dofs.vertex_dof.assign(mesh.num_nodes(), -1);
  for (std::size_t e = 0; e < table.size(); ++e)
  {
    if (!pec_edge[e])
    {
      dofs.edge_dof[e] = static_cast<int>(dofs.free_edges.size());
      dofs.free_edges.push_back(static_cast<int>(e));
    }
  }
  // Nodes not used by any triangle carry no basis function.
  std::vector<char> used(mesh.num_nodes(), 0);
  for (const auto &tri : mesh.triangles())
  {
    for (int v : tri.v) used[v] = 1;
  }
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v)
  {
    if (used[v] && !pec_node[v])
    {
      dofs.vertex_dof[v] = static_cast<int>(dofs.free_vertices.size());
      dofs.free_vertices.push_back(static_cast<int>(v));
    }
  }
  return dofs;
}

LocalBlocks local_element_matrices(const std::array<Point, 3> &coords,
                                   std::span<const double, 7> eps, std::span<const double, 7> mu)
{
  const double area = signed_area(coords[0], coords[1], coords[2]);
  if (!(area > 0.0))
  {
    throw Error(ErrorKind::Validation, "fem", "degenerate or clockwise triangle");
  }
  const auto grad = barycentric_gradients(coords, area);
  const auto &rule = triangle_rule_deg5();
  const auto &le = EdgeTable::kLocalEdges;

  std::array<double, 3> curl{};
  for (int k = 0; k < 3; ++k)
  {
    curl[k] = 2.0 * cross(grad[le[k][0]], grad[le[k][1]]);
  }

  LocalBlocks lb;
  for (auto *m : {&lb.C, &lb.Me, &lb.Mmu, &lb.G, &lb.D, &lb.Gdiv, &lb.Mv, &lb.Kv})
  {
    m->setZero();
  }
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    const auto &lam = rule[q].lambda;
    const double w = rule[q].weight * area;
    const double we = w * eps[q], wm = w / mu[q];
    std::array<Vec2, 3> phi;
    for (int k = 0; k < 3; ++k)
    {
      auto [a, b] = le[k];
      phi[k] = lam[a] * grad[b] - lam[b] * grad[a];
    }
    for (int i = 0; i < 3; ++i)
    {
      for (int j = i; j < 3; ++j)
      {
        lb.C(i, j) += wm * curl[i] * curl[j];
        lb.Me(i, j) += we * phi[i].dot(phi[j]);
        lb.Mmu(i, j) += wm * phi[i].dot(phi[j]);
        lb.Mv(i, j) += we * lam[i] * lam[j];
        lb.Kv(i, j) += wm * grad[i].dot(grad[j]);
      }
      for (int k = 0; k < 3; ++k)
      {
        const double pg = phi[i].dot(grad[k]);
        lb.G(i, k) += wm * pg;
        lb.D(k, i) -= we * pg;
        lb.Gdiv(k, i) += wm * pg;
      }
    }
  }
  for (auto *m : {&lb.C, &lb.Me, &lb.Mmu, &lb.Mv, &lb.Kv})
  {
    *m = m->triangularView<Eigen::Upper>().toDenseMatrix().selfadjointView<Eigen::Upper>();
  }
  return lb;
}

PencilBlocks assemble_blocks(const Mesh &mesh, const DofMap &dofs, const MaterialMap &materials,
                             int threads)
{
  materials.check_against(mesh);
  const std::size_t nt = mesh.num_triangles();
  const std::size_t nchunks =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                              std::max<std::size_t>(nt, 1));
  std::vector<TripletSet> parts(nchunks);
  auto range = [&](std::size_t c) {
    return std::pair{c * nt / nchunks, (c + 1) * nt / nchunks};
  };
  if (nchunks == 1)
  {
    assemble_range(mesh, dofs, materials, 0, nt, parts[0]);
  }
  else
  {
    std::vector<std::jthread> pool;
    for (std::size_t c = 0; c < nchunks; ++c)
    {
      pool.emplace_back([&, c] {
        auto [b, e] = range(c);
        assemble_range(mesh, dofs, materials, b, e, parts[c]);
      });
    }
  }
  // Merge in chunk order so the summation order matches the sequential path.
  for (std::size_t c = 1; c < nchunks; ++c)
  {
    parts[0].append(parts[c]);
  }
  const auto &all = parts[0];
  const int ne = dofs.num_edge_dofs(), nv = dofs.num_vertex_dofs();
  PencilBlocks b;
  b.C = from_triplets(ne, ne, all.C);
  b.Me = from_triplets(ne, ne, all.Me);
  b.Mmu = from_triplets(ne, ne, all.Mmu);
  b.G = from_triplets(ne, nv, all.G);
  b.D = from_triplets(nv, ne, all.D);
  b.Gdiv = from_triplets(nv, ne, all.Gdiv);
  b.Mv = from_triplets(nv, nv, all.Mv);
  b.Kv = from_triplets(nv, nv, all.Kv);
  return b;
}

Pencil pencil_vd1(const PencilBlocks &b, double omega)
{
  const int ne = b.num_edge_dofs(), nv = b.num_vertex_dofs();
  const double w2 = omega * omega;
  SparseMatrix top_left = b.C - w2 * b.Me;
  SparseMatrix zero_ev(ne, nv), zero_ve(nv, ne), zero_vv(nv, nv);
  Pencil p;
  p.A = block2x2(top_left, b.G, b.D, b.Mv, ne, nv);
  p.B = block2x2(SparseMatrix(-b.Mmu), zero_ev, zero_ve, zero_vv, ne, nv);
  return p;
}

Pencil pencil_vd2(const PencilBlocks &b, double omega)
{
  const int ne = b.num_edge_dofs(), nv = b.num_vertex_dofs();
  const double w2 = omega * omega;
  SparseMatrix top_left = b.C - w2 * b.Me;
  SparseMatrix bottom_right = w2 * b.Mv - b.Kv;
  SparseMatrix zero_ev(ne, nv), zero_ve(nv, ne), zero_vv(nv, nv);
  Pencil p;
  p.A = block2x2(top_left, b.G, zero_ve, bottom_right, ne, nv);
  p.B = block2x2(SparseMatrix(-b.Mmu), zero_ev, b.Gdiv, zero_vv, ne, nv);
  return p;
}

SparseMatrix scalar_helmholtz(const PencilBlocks &b, double omega)
{
  SparseMatrix h = b.Kv - (omega * omega) * b.Mv;
  h.makeCompressed();
  return h;
}

SparseMatrix orth_operator(const PencilBlocks &b, double omega)
{
  SparseMatrix a = b.C - (omega * omega) * b.Me;
  a.makeCompressed();
  return a;
}

Complex a_orth(const PencilBlocks &b, double omega, const VectorXcd &x, const VectorXcd &y)
{
  VectorXcd ax = b.C.cast<Complex>() * x - (omega * omega) * (b.Me.cast<Complex>() * x);
  return y.dot(ax);  // Eigen's dot conjugates the left operand
}

VectorXd interpolate_hcurl(const Mesh &mesh, const DofMap &dofs, const VectorField &field)
{
  // 3-point Gauss-Legendre on [0,1].
  const double g = std::sqrt(0.6);
  const std::array<double, 3> s{0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
  const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const auto &table = mesh.edge_table();
  VectorXd coeff = VectorXd::Zero(dofs.num_edge_dofs());
  for (int d = 0; d < dofs.num_edge_dofs(); ++d)
  {
    const auto &[a, b] = table.edges[dofs.free_edges[d]];
    const auto &p = mesh.nodes()[a];
    const auto &q = mesh.nodes()[b];
    const double tx = q.x - p.x, ty = q.y - p.y;
    double sum = 0.0;
    for (int k = 0; k < 3; ++k)
    {
      auto f = field(p.x + s[k] * tx, p.y + s[k] * ty);
      sum += w[k] * (f[0] * tx + f[1] * ty);
    }
    coeff[d] = sum;
  }
  return coeff;
}

SparseMatrix gradient_matrix(const Mesh &mesh, const DofMap &dofs)
{
  const auto &table = mesh.edge_table();
  std::vector<Eigen::Triplet<double>> t;
  for (int d = 0; d < dofs.num_edge_dofs(); ++d)
  {
    const auto &[a, b] = table.edges[dofs.free_edges[d]];
    if (int va = dofs.vertex_dof[a]; va >= 0) t.emplace_back(d, va, -1.0);
    if (int vb = dofs.vertex_dof[b]; vb >= 0) t.emplace_back(d, vb, 1.0);
  }
  return from_triplets(dofs.num_edge_dofs(), dofs.num_vertex_dofs(), t);
}

EdgeFieldSample evaluate_edge_field(const Mesh &mesh, const DofMap &dofs, const VectorXcd &u,
                                    std::size_t t, const std::array<double, 3> &lambda)
{
  const auto coords = mesh.triangle_coords(t);
  const auto grad = barycentric_gradients(coords, mesh.signed_area(t));
  const auto &table = mesh.edge_table();
  const auto &le = EdgeTable::kLocalEdges;
  EdgeFieldSample out{{Complex(0.0), Complex(0.0)}, Complex(0.0)};
  for (int k = 0; k < 3; ++k)
  {
    const int d = dofs.edge_dof[table.tri_edges[t][k]];
    if (d < 0)
    {
      continue;
    }
    const Complex c = double(table.tri_signs[t][k]) * u[d];
    auto [a, b] = le[k];
    Vec2 phi = lambda[a] * grad[b] - lambda[b] * grad[a];
    out.value[0] += c * phi.x();
    out.value[1] += c * phi.y();
    out.curl += c * 2.0 * cross(grad[a], grad[b]);
  }
  return out;
}

}  // namespace wgm
