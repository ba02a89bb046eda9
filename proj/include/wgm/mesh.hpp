#ifndef WGM_MESH_HPP
#define WGM_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wgm
{

inline constexpr const char *kPecTag = "pec";

struct Point
{
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point &) const = default;
};

struct Triangle
{
  std::array<int, 3> v{};  // counterclockwise
  std::string region;
  bool operator==(const Triangle &) const = default;
};

struct BoundaryEdge
{
  std::array<int, 2> v{};
  std::string tag;
  bool operator==(const BoundaryEdge &) const = default;
};

// Global edge enumeration. Edges are sorted by (low node, high node) and oriented from the
// lower to the higher node index. Local edge k of a triangle joins local vertices
// kLocalEdges[k]; its sign is +1 when that local orientation matches the global one.
struct EdgeTable
{
  static constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {0, 2}, {1, 2}}};

  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::array<int, 3>> tri_signs;
  std::vector<int> incident_count;  // number of triangles touching each edge

  // Index of the edge joining nodes a and b, or -1.
  int find(int a, int b) const;
  std::size_t size() const { return edges.size(); }
  bool operator==(const EdgeTable &) const = default;
};

// Conforming triangle mesh of a waveguide cross-section. Immutable once built through one of
// the factory functions below, which validate the invariants and build the edge table.
class Mesh
{
public:
  Mesh() = default;
  Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point> &nodes() const { return nodes_; }
  const std::vector<Triangle> &triangles() const { return triangles_; }
  const std::vector<BoundaryEdge> &boundary_edges() const { return boundary_edges_; }
  const EdgeTable &edge_table() const { return edge_table_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edge_table_.size(); }

  std::array<Point, 3> triangle_coords(std::size_t t) const;
  double signed_area(std::size_t t) const;
  double total_area() const;

  bool operator==(const Mesh &) const = default;

private:
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  EdgeTable edge_table_;
};

double signed_area(const Point &a, const Point &b, const Point &c);

EdgeTable build_edge_table(const std::vector<Triangle> &triangles);

Mesh parse_mesh(std::string_view text);
std::string serialize_mesh(const Mesh &mesh);
Mesh read_mesh_file(const std::string &path);
void write_mesh_file(const Mesh &mesh, const std::string &path);

// Structured triangulation of [0,a]x[0,b] with alternating cell diagonals. Node (i,j) has
// index j*(nx+1)+i; the outer boundary is tagged PEC and every triangle gets region "0".
Mesh generate_rect_mesh(double a, double b, int nx, int ny);

// Red refinement: every triangle split into four through its edge midpoints. The midpoint of
// edge e becomes node num_nodes()+e.
Mesh refine_uniform(const Mesh &mesh);

// 64-bit FNV-1a hash of the canonical serialization.
std::uint64_t mesh_fingerprint(const Mesh &mesh);
std::string fingerprint_hex(std::uint64_t fp);

}  // namespace wgm

#endif  // WGM_MESH_HPP
