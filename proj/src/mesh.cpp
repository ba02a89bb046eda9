#include "wgm/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Splits a line into whitespace separated tokens, dropping anything after '#'.
std::vector<std::string_view> tokenize(std::string_view line)
{
  if (auto hash = line.find('#'); hash != std::string_view::npos)
  {
    line = line.substr(0, hash);
  }
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
    {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
    {
      ++j;
    }
    if (j > i)
    {
      tokens.push_back(line.substr(i, j - i));
    }
    i = j;
  }
  return tokens;
}

class LineReader
{
public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-empty line as tokens; empty vector at end of input.
  std::vector<std::string_view> next()
  {
    while (pos_ < text_.size())
    {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos)
      {
        end = text_.size();
      }
      auto line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      auto tokens = tokenize(line);
      if (!tokens.empty())
      {
        return tokens;
      }
    }
    ++line_;
    return {};
  }

  std::size_t line() const { return line_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

long parse_int(std::string_view tok, std::size_t line)
{
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
  {
    throw ParseError("mesh", line, "expected integer, got '" + std::string(tok) + "'");
  }
  return v;
}

double parse_double(std::string_view tok, std::size_t line)
{
  std::string s(tok);
  char *end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
  {
    throw ParseError("mesh", line, "expected number, got '" + s + "'");
  }
  return v;
}

void expect_header(LineReader &in, std::string_view name)
{
  auto tok = in.next();
  if (tok.size() != 1 || tok[0] != name)
  {
    throw ParseError("mesh", in.line(),
                     "malformed section header, expected '" + std::string(name) + "'");
  }
}

std::size_t read_count(LineReader &in)
{
  auto tok = in.next();
  if (tok.size() != 1)
  {
    throw ParseError("mesh", in.line(), "expected a single entry count");
  }
  long n = parse_int(tok[0], in.line());
  if (n < 0)
  {
    throw ParseError("mesh", in.line(), "negative entry count");
  }
  return static_cast<std::size_t>(n);
}

void check_id(long id, std::size_t expected, std::size_t line)
{
  if (id != static_cast<long>(expected))
  {
    throw ParseError("mesh", line,
                     "entry id " + std::to_string(id) + " out of order, expected " +
                         std::to_string(expected));
  }
}

int check_node(long v, std::size_t num_nodes, std::size_t line)
{
  if (v < 0 || v >= static_cast<long>(num_nodes))
  {
    throw ParseError("mesh", line, "dangling node index " + std::to_string(v));
  }
  return static_cast<int>(v);
}

}  // namespace

double signed_area(const Point &a, const Point &b, const Point &c)
{
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

int EdgeTable::find(int a, int b) const
{
  std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key)
  {
    return -1;
  }
  return static_cast<int>(it - edges.begin());
}

EdgeTable build_edge_table(const std::vector<Triangle> &triangles)
{
  EdgeTable table;
  std::vector<std::array<int, 2>> all;
  all.reserve(3 * triangles.size());
  for (const auto &tri : triangles)
  {
    for (const auto &[i, j] : EdgeTable::kLocalEdges)
    {
      all.push_back({std::min(tri.v[i], tri.v[j]), std::max(tri.v[i], tri.v[j])});
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  table.edges = std::move(all);
  table.incident_count.assign(table.edges.size(), 0);
  table.tri_edges.resize(triangles.size());
  table.tri_signs.resize(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t)
  {
    const auto &v = triangles[t].v;
    for (int k = 0; k < 3; ++k)
    {
      auto [i, j] = EdgeTable::kLocalEdges[k];
      int e = table.find(v[i], v[j]);
      table.tri_edges[t][k] = e;
      table.tri_signs[t][k] = v[i] < v[j] ? 1 : -1;
      ++table.incident_count[e];
    }
  }
  return table;
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges)
  : nodes_(std::move(nodes)), triangles_(std::move(triangles)),
    boundary_edges_(std::move(boundary_edges))
{
  const auto n = static_cast<int>(nodes_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t)
  {
    for (int v : triangles_[t].v)
    {
      if (v < 0 || v >= n)
      {
        throw Error(ErrorKind::Validation, "mesh",
                    "triangle " + std::to_string(t) + ": dangling node index " +
                        std::to_string(v));
      }
    }
    if (!(signed_area(t) > 0.0))
    {
      throw Error(ErrorKind::Validation, "mesh",
                  "triangle " + std::to_string(t) + ": non-positive area");
    }
  }
  edge_table_ = build_edge_table(triangles_);
  for (std::size_t k = 0; k < boundary_edges_.size(); ++k)
  {
    const auto &be = boundary_edges_[k];
    if (be.v[0] < 0 || be.v[0] >= n || be.v[1] < 0 || be.v[1] >= n)
    {
      throw Error(ErrorKind::Validation, "mesh",
                  "boundary edge " + std::to_string(k) + ": dangling node index");
    }
    if (edge_table_.find(be.v[0], be.v[1]) < 0)
    {
      throw Error(ErrorKind::Validation, "mesh",
                  "boundary edge " + std::to_string(k) + " does not match any triangle edge");
    }
  }
}

std::array<Point, 3> Mesh::triangle_coords(std::size_t t) const
{
  const auto &v = triangles_[t].v;
  return {nodes_[v[0]], nodes_[v[1]], nodes_[v[2]]};
}

double Mesh::signed_area(std::size_t t) const
{
  auto p = triangle_coords(t);
  return wgm::signed_area(p[0], p[1], p[2]);
}

double Mesh::total_area() const
{
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
  {
    sum += signed_area(t);
  }
  return sum;
}

Mesh parse_mesh(std::string_view text)
{
  LineReader in(text);

  expect_header(in, "$nodes");
  std::size_t num_nodes = read_count(in);
  std::vector<Point> nodes(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i)
  {
    auto tok = in.next();
    if (tok.size() != 3)
    {
      throw ParseError("mesh", in.line(), "node line needs '<id> <x> <y>'");
    }
    check_id(parse_int(tok[0], in.line()), i, in.line());
    nodes[i] = {parse_double(tok[1], in.line()), parse_double(tok[2], in.line())};
  }

  expect_header(in, "$triangles");
  std::size_t num_tris = read_count(in);
  std::vector<Triangle> triangles(num_tris);
  for (std::size_t t = 0; t < num_tris; ++t)
  {
    auto tok = in.next();
    if (tok.size() != 5)
    {
      throw ParseError("mesh", in.line(), "triangle line needs '<id> <v1> <v2> <v3> <region>'");
    }
    check_id(parse_int(tok[0], in.line()), t, in.line());
    auto &tri = triangles[t];
    for (int k = 0; k < 3; ++k)
    {
      tri.v[k] = check_node(parse_int(tok[1 + k], in.line()), num_nodes, in.line());
    }
    tri.region = std::string(tok[4]);
    if (!(signed_area(nodes[tri.v[0]], nodes[tri.v[1]], nodes[tri.v[2]]) > 0.0))
    {
      throw ParseError("mesh", in.line(), "non-positive area for triangle " + std::to_string(t));
    }
  }
  EdgeTable table = build_edge_table(triangles);

  expect_header(in, "$boundary_edges");
  std::size_t num_bdr = read_count(in);
  std::vector<BoundaryEdge> boundary(num_bdr);
  for (std::size_t k = 0; k < num_bdr; ++k)
  {
    auto tok = in.next();
    if (tok.size() != 4)
    {
      throw ParseError("mesh", in.line(), "boundary edge line needs '<id> <v1> <v2> <tag>'");
    }
    check_id(parse_int(tok[0], in.line()), k, in.line());
    auto &be = boundary[k];
    be.v[0] = check_node(parse_int(tok[1], in.line()), num_nodes, in.line());
    be.v[1] = check_node(parse_int(tok[2], in.line()), num_nodes, in.line());
    be.tag = std::string(tok[3]);
    if (table.find(be.v[0], be.v[1]) < 0)
    {
      throw ParseError("mesh", in.line(),
                       "boundary edge " + std::to_string(k) + " does not match any triangle edge");
    }
  }
  expect_header(in, "$end");
  return Mesh(std::move(nodes), std::move(triangles), std::move(boundary));
}

std::string serialize_mesh(const Mesh &mesh)
{
  std::ostringstream out;
  out << "$nodes\n" << mesh.num_nodes() << "\n";
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
  {
    const auto &p = mesh.nodes()[i];
    out << i << " " << format_double(p.x) << " " << format_double(p.y) << "\n";
  }
  out << "$triangles\n" << mesh.num_triangles() << "\n";
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto &tri = mesh.triangles()[t];
    out << t << " " << tri.v[0] << " " << tri.v[1] << " " << tri.v[2] << " " << tri.region
        << "\n";
  }
  out << "$boundary_edges\n" << mesh.boundary_edges().size() << "\n";
  for (std::size_t k = 0; k < mesh.boundary_edges().size(); ++k)
  {
    const auto &be = mesh.boundary_edges()[k];
    out << k << " " << be.v[0] << " " << be.v[1] << " " << be.tag << "\n";
  }
  out << "$end\n";
  return out.str();
}

Mesh read_mesh_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorKind::Io, "mesh", "cannot open mesh file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mesh(buf.str());
}

void write_mesh_file(const Mesh &mesh, const std::string &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error(ErrorKind::Io, "mesh", "cannot write mesh file '" + path + "'");
  }
  out << serialize_mesh(mesh);
  if (!out)
  {
    throw Error(ErrorKind::Io, "mesh", "write failed for '" + path + "'");
  }
}

Mesh generate_rect_mesh(double a, double b, int nx, int ny)
{
  if (!(a > 0.0) || !(b > 0.0) || nx < 1 || ny < 1)
  {
    throw Error(ErrorKind::Validation, "mesh", "generate_rect_mesh: need a,b > 0 and nx,ny >= 1");
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
  {
    for (int i = 0; i <= nx; ++i)
    {
      nodes.push_back({a * i / nx, b * j / ny});
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
    {
      int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0)
      {
        // '/' diagonal
        tris.push_back({{p00, p10, p11}, "0"});
        tris.push_back({{p00, p11, p01}, "0"});
      }
      else
      {
        // '\' diagonal
        tris.push_back({{p00, p10, p01}, "0"});
        tris.push_back({{p10, p11, p01}, "0"});
      }
    }
  }
  std::vector<BoundaryEdge> bdr;
  for (int i = 0; i < nx; ++i)
  {
    bdr.push_back({{id(i, 0), id(i + 1, 0)}, kPecTag});
  }
  for (int j = 0; j < ny; ++j)
  {
    bdr.push_back({{id(nx, j), id(nx, j + 1)}, kPecTag});
  }
  for (int i = nx; i > 0; --i)
  {
    bdr.push_back({{id(i, ny), id(i - 1, ny)}, kPecTag});
  }
  for (int j = ny; j > 0; --j)
  {
    bdr.push_back({{id(0, j), id(0, j - 1)}, kPecTag});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(bdr));
}

Mesh refine_uniform(const Mesh &mesh)
{
  const auto &table = mesh.edge_table();
  const int n0 = static_cast<int>(mesh.num_nodes());
  std::vector<Point> nodes = mesh.nodes();
  nodes.reserve(mesh.num_nodes() + table.size());
  for (const auto &[a, b] : table.edges)
  {
    const auto &p = mesh.nodes()[a];
    const auto &q = mesh.nodes()[b];
    nodes.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
  }
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto &tri = mesh.triangles()[t];
    const auto &e = table.tri_edges[t];
    // Midpoints of local edges (0,1), (0,2), (1,2).
    int m01 = n0 + e[0], m02 = n0 + e[1], m12 = n0 + e[2];
    int v0 = tri.v[0], v1 = tri.v[1], v2 = tri.v[2];
    tris.push_back({{v0, m01, m02}, tri.region});
    tris.push_back({{m01, v1, m12}, tri.region});
    tris.push_back({{m02, m12, v2}, tri.region});
    tris.push_back({{m01, m12, m02}, tri.region});
  }
  std::vector<BoundaryEdge> bdr;
  bdr.reserve(2 * mesh.boundary_edges().size());
  for (const auto &be : mesh.boundary_edges())
  {
    int mid = n0 + table.find(be.v[0], be.v[1]);
    bdr.push_back({{be.v[0], mid}, be.tag});
    bdr.push_back({{mid, be.v[1]}, be.tag});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(bdr));
}

std::uint64_t mesh_fingerprint(const Mesh &mesh)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_mesh(mesh))
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fingerprint_hex(std::uint64_t fp)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

}  // namespace wgm
