#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "test_util.hpp"
#include "wgm/error.hpp"
#include "wgm/mesh.hpp"

using namespace wgm;

namespace
{

std::size_t parse_error_line(const std::string &text)
{
  try
  {
    parse_mesh(text);
  }
  catch (const ParseError &e)
  {
    return e.line();
  }
  return 0;
}

std::string error_text(const std::string &text)
{
  try
  {
    parse_mesh(text);
  }
  catch (const Error &e)
  {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("reference triangle parses")
{
  const Mesh m = parse_mesh(test::kReferenceTriangle);
  CHECK(m.num_nodes() == 3);
  CHECK(m.num_triangles() == 1);
  CHECK(m.num_edges() == 3);
  for (int c : m.edge_table().incident_count) CHECK(c == 1);
  CHECK(m.boundary_edges().size() == 3);
  CHECK(m.total_area() == doctest::Approx(0.5));
}

TEST_CASE("clockwise triangle is rejected with its line")
{
  const std::string doc = "$nodes\n3\n0 0 0\n1 1 0\n2 0 1\n"
                          "$triangles\n1\n0 0 2 1 0\n"
                          "$boundary_edges\n0\n$end\n";
  CHECK(parse_error_line(doc) == 8);
  CHECK(error_text(doc).find("non-positive area") != std::string::npos);
}

TEST_CASE("malformed input reports line numbers")
{
  CHECK(parse_error_line("$node\n3\n") == 1);
  CHECK(parse_error_line("$nodes\n1\n0 0 0\n$triangles\n1\n0 0 1 2 r\n") == 6);  // dangling
  CHECK(error_text("$nodes\n1\n0 0 0\n$triangles\n1\n0 0 1 2 r\n").find("dangling") !=
        std::string::npos);
  // boundary edge 0-1 of a triangle 0-1-2 exists; 0-3 does not
  const std::string bad_edge = "$nodes\n4\n0 0 0\n1 1 0\n2 0 1\n3 1 1\n"
                               "$triangles\n1\n0 0 1 2 0\n"
                               "$boundary_edges\n1\n0 0 3 pec\n$end\n";
  CHECK(parse_error_line(bad_edge) == 12);
  CHECK(error_text(bad_edge).find("does not match") != std::string::npos);
  CHECK(parse_error_line("$nodes\n1\n0 zero 0\n") == 3);
  CHECK(parse_error_line("$nodes\n2\n0 0 0\n") > 0);  // truncated
}

TEST_CASE("comments and blank lines are ignored")
{
  const std::string doc = std::string("# reference triangle\n\n") + test::kReferenceTriangle;
  CHECK(parse_mesh(doc) == parse_mesh(test::kReferenceTriangle));
}

TEST_CASE("generate_rect_mesh counts")
{
  const Mesh a = generate_rect_mesh(1, 0.5, 1, 1);
  CHECK(a.num_nodes() == 4);
  CHECK(a.num_triangles() == 2);
  CHECK(a.num_edges() == 5);
  CHECK(a.boundary_edges().size() == 4);

  const Mesh b = generate_rect_mesh(1, 0.5, 4, 2);
  CHECK(b.num_nodes() == 15);
  CHECK(b.num_triangles() == 16);

  const Mesh c = generate_rect_mesh(1, 0.5, 8, 4);
  CHECK(c.total_area() == doctest::Approx(0.5).epsilon(1e-14));
  for (const auto &be : c.boundary_edges()) CHECK(be.tag == kPecTag);
  for (std::size_t t = 0; t < c.num_triangles(); ++t) CHECK(c.signed_area(t) > 0.0);
  CHECK_THROWS_AS(generate_rect_mesh(0, 1, 1, 1), Error);
  CHECK_THROWS_AS(generate_rect_mesh(1, 1, 0, 1), Error);
}

TEST_CASE("outer boundary is exactly the set of single-incidence edges")
{
  const Mesh m = generate_rect_mesh(1, 0.5, 6, 3);
  std::set<int> bdr;
  for (const auto &be : m.boundary_edges()) bdr.insert(m.edge_table().find(be.v[0], be.v[1]));
  const auto &et = m.edge_table();
  for (std::size_t e = 0; e < et.size(); ++e)
  {
    CHECK((et.incident_count[e] == 1) == (bdr.count(static_cast<int>(e)) == 1));
  }
}

TEST_CASE("edge table orientation and signs")
{
  const Mesh m = generate_rect_mesh(1, 0.5, 4, 2);
  const auto &et = m.edge_table();
  std::set<std::pair<int, int>> seen;
  for (const auto &e : et.edges)
  {
    CHECK(e[0] < e[1]);
    CHECK(seen.insert({e[0], e[1]}).second);
  }
  // Euler: E = V + T - 1 for a simply connected triangulation
  CHECK(et.size() == m.num_nodes() + m.num_triangles() - 1);
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
  {
    const auto &v = m.triangles()[t].v;
    for (int k = 0; k < 3; ++k)
    {
      const int a = v[EdgeTable::kLocalEdges[k][0]], b = v[EdgeTable::kLocalEdges[k][1]];
      const auto &e = et.edges[et.tri_edges[t][k]];
      CHECK(std::min(a, b) == e[0]);
      CHECK(std::max(a, b) == e[1]);
      CHECK(et.tri_signs[t][k] == (a < b ? 1 : -1));
    }
  }
}

TEST_CASE("round trip through the text format")
{
  const Mesh g = generate_rect_mesh(1, 0.5, 2, 1);
  const std::string s = serialize_mesh(g);
  const Mesh p = parse_mesh(s);
  CHECK(p == g);
  CHECK(serialize_mesh(p) == s);

  const Mesh irr = refine_uniform(generate_rect_mesh(0.3, 0.7, 3, 5));
  CHECK(parse_mesh(serialize_mesh(irr)) == irr);

  const auto path = test::tmp_dir() / "roundtrip.mesh";
  write_mesh_file(irr, path.string());
  CHECK(read_mesh_file(path.string()) == irr);
  CHECK(test::slurp(path) == serialize_mesh(irr));
  CHECK_THROWS_AS(read_mesh_file((test::tmp_dir() / "missing.mesh").string()), Error);
}

TEST_CASE("uniform refinement")
{
  const Mesh m = generate_rect_mesh(1, 0.5, 2, 1);
  const Mesh r = refine_uniform(m);
  CHECK(r.num_nodes() == m.num_nodes() + m.num_edges());
  CHECK(r.num_triangles() == 4 * m.num_triangles());
  CHECK(r.boundary_edges().size() == 2 * m.boundary_edges().size());
  CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-14));
  for (std::size_t t = 0; t < r.num_triangles(); ++t)
  {
    CHECK(r.signed_area(t) == doctest::Approx(m.signed_area(t / 4) / 4).epsilon(1e-12));
    CHECK(r.triangles()[t].region == m.triangles()[t / 4].region);
  }
  for (const auto &be : r.boundary_edges()) CHECK(be.tag == kPecTag);
  // midpoint of edge e is node n0 + e
  for (std::size_t e = 0; e < m.num_edges(); ++e)
  {
    const auto &ed = m.edge_table().edges[e];
    const Point &mid = r.nodes()[m.num_nodes() + e];
    CHECK(mid.x == doctest::Approx(0.5 * (m.nodes()[ed[0]].x + m.nodes()[ed[1]].x)));
    CHECK(mid.y == doctest::Approx(0.5 * (m.nodes()[ed[0]].y + m.nodes()[ed[1]].y)));
  }
}

TEST_CASE("fingerprint")
{
  const Mesh a = generate_rect_mesh(1, 0.5, 4, 2);
  const Mesh b = generate_rect_mesh(1, 0.5, 4, 2);
  const Mesh c = generate_rect_mesh(1, 0.5, 2, 4);
  CHECK(mesh_fingerprint(a) == mesh_fingerprint(b));
  CHECK(mesh_fingerprint(a) != mesh_fingerprint(c));
  const std::string hex = fingerprint_hex(mesh_fingerprint(a));
  CHECK(hex.size() == 16);
  CHECK(hex == fingerprint_hex(mesh_fingerprint(parse_mesh(serialize_mesh(a)))));
  CHECK(fingerprint_hex(0x1234) == "0000000000001234");
}

TEST_CASE("direct construction validates")
{
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}, "0"}}, {}), Error);
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 5}, "0"}}, {}), Error);
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{{0, 1, 2}, "0"}}, {{{0, 3}, "pec"}}),
                  Error);
}
