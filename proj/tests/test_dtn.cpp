#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "test_util.hpp"
#include "wgm/analytic.hpp"
#include "wgm/dtn.hpp"
#include "wgm/error.hpp"
#include "wgm/pipeline.hpp"

using namespace wgm;

namespace
{

const Complex I(0.0, 1.0);

struct Fixture
{
  Mesh mesh;
  SolveResult res;
  DtnMatrix dtn;
};

const Fixture &rect16(int modes = 12)
{
  static std::map<int, Fixture> cache;
  auto it = cache.find(modes);
  if (it == cache.end())
  {
    Fixture f;
    f.mesh = test::rect(16);
    SolveOptions o;
    o.omega = 6.5;
    o.num_modes = modes;
    f.res = solve_modes(f.mesh, uniform_materials(f.mesh, 1, 1), o);
    DtnOptions d;
    d.fingerprint = fingerprint_hex(mesh_fingerprint(f.mesh));
    d.params = {{"num_modes", std::to_string(modes)}};
    f.dtn = build_dtn(f.res.blocks, f.res.omega, f.res.modes, f.res.clusters, d);
    it = cache.emplace(modes, std::move(f)).first;
  }
  return it->second;
}

VectorXcd w_of(const Fixture &f, const VectorXcd &u)
{
  const auto &b = f.res.blocks;
  return b.C.cast<Complex>() * u - (f.res.omega * f.res.omega) * (b.Me.cast<Complex>() * u);
}

bool singleton(const Fixture &f, int j)
{
  for (const auto &c : f.res.clusters)
  {
    if (c.members.size() == 1 && c.members[0] == j) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("expansion coefficients")
{
  const auto &f = rect16();
  const auto &modes = f.res.modes;
  const int m = static_cast<int>(modes.size());
  for (int j = 0; j < m; ++j)
  {
    if (!singleton(f, j)) continue;
    const VectorXcd a = expansion_coeffs(f.res.blocks, f.res.omega, modes, f.res.clusters, modes[j].u);
    for (int k = 0; k < m; ++k)
    {
      if (k == j)
        CHECK(std::abs(a[k] - 1.0) < 1e-10);
      else
        CHECK(std::abs(a[k]) <= 1e-8);
    }
  }
  const VectorXcd t = 2.0 * modes[0].u + 3.0 * modes[1].u;
  const VectorXcd a = expansion_coeffs(f.res.blocks, f.res.omega, modes, f.res.clusters, t);
  CHECK(std::abs(a[0] - 2.0) < 1e-8);
  CHECK(std::abs(a[1] - 3.0) < 1e-8);

  // a degenerate pair member: both coefficients recovered through the Gram system
  for (const auto &c : f.res.clusters)
  {
    if (c.members.size() != 2) continue;
    const VectorXcd tc = Complex(0.5, 1.0) * modes[c.members[0]].u - 2.0 * modes[c.members[1]].u;
    const VectorXcd ac = expansion_coeffs(f.res.blocks, f.res.omega, modes, f.res.clusters, tc);
    CHECK(std::abs(ac[c.members[0]] - Complex(0.5, 1.0)) < 1e-8);
    CHECK(std::abs(ac[c.members[1]] + 2.0) < 1e-8);
  }
}

TEST_CASE("expansion of the interpolated TE10 field")
{
  // leakage into the other modes shrinks under refinement
  double prev_leak = 1e300, prev_err = 1e300;
  for (int n : {8, 16, 32})
  {
    const Mesh mesh = test::rect(n);
    SolveOptions o;
    o.omega = 6.5;
    o.num_modes = 6;
    const auto r = solve_modes(mesh, uniform_materials(mesh, 1, 1), o);
    const RectField te10 = rect_field(RectKind::TE, 1, 0, 1.0, 0.5);
    const VectorXd t = interpolate_hcurl(mesh, build_dofmap(mesh), [&](double x, double y) { return te10.e(x, y); });
    const VectorXcd a = expansion_coeffs(r.blocks, r.omega, r.modes, r.clusters, t.cast<Complex>());
    // reference: a_orth-projection coefficient of the interpolant onto itself
    const Complex g = a_orth(r.blocks, r.omega, t.cast<Complex>(), t.cast<Complex>());
    const double interp = std::sqrt(std::abs(g));
    double leak = 0.0;
    for (int k = 1; k < a.size(); ++k) leak = std::max(leak, std::abs(a[k]));
    const double err = std::abs(std::abs(a[0]) - interp) / interp;
    // TE10 is symmetric under y -> b - y on this mesh family, so leakage sits at round-off
    CHECK(leak <= 1e-8);
    CHECK(err < prev_err);
    prev_leak = leak;
    prev_err = err;
  }
}

TEST_CASE("mode reproduction and pairing")
{
  const auto &f = rect16();
  const auto &modes = f.res.modes;
  CHECK(f.dtn.sign == 1);
  CHECK(f.dtn.param("energy_test").find("propagating") != std::string::npos);
  for (int j = 0; j < static_cast<int>(modes.size()); ++j)
  {
    const VectorXcd w = w_of(f, modes[j].u);
    const VectorXcd Nu = apply_dtn(f.dtn, modes[j].u);
    const Complex c = static_cast<double>(f.dtn.sign) * I / modes[j].beta;
    CHECK(std::abs(f.dtn.factors[j] - c) < 1e-14 * std::abs(c));
    CHECK((Nu - c * w).norm() <= 1e-8 * (c * w).norm());
  }
  // TE10 pairing equals -i / beta
  const Complex pair = modes[0].u.dot(apply_dtn(f.dtn, modes[0].u));
  const Complex expect = -I / modes[0].beta;
  CHECK(std::abs(pair - expect) <= 1e-8 * std::abs(expect));
  // outgoing power is positive for each propagating mode
  for (const auto &m : modes)
  {
    if (m.classification != ModeClass::Propagating) continue;
    const Complex p = m.u.dot(apply_dtn(f.dtn, m.u));
    CHECK(std::abs(p.real()) < 1e-10 * std::abs(p));
    CHECK(-p.imag() / (2.0 * f.res.omega) > 0.0);
  }
  // evanescent modes: real Robin term, sign follows a_orth(u, u) (TE positive, TM negative)
  for (const auto &m : modes)
  {
    if (m.classification != ModeClass::Evanescent) continue;
    const Complex p = m.u.dot(apply_dtn(f.dtn, m.u));
    CHECK(std::abs(p.imag()) < 1e-10 * std::abs(p));
    CHECK((p.real() > 0.0) == (m.norm_sign > 0));
    CHECK(std::abs(p.real()) == doctest::Approx(1.0 / std::abs(m.beta)));
  }
}

TEST_CASE("cluster consistency against a brute-force projection")
{
  const auto &f = rect16();
  const auto &modes = f.res.modes;
  const double te01 = rect_beta(RectKind::TE, 0, 1, 1.0, 0.5, 6.5);
  const ModeCluster *pair = nullptr;
  for (const auto &c : f.res.clusters)
  {
    if (c.members.size() == 2 && std::abs(modes[c.members[0]].beta_sq - te01) < 0.1 * te01) pair = &c;
  }
  REQUIRE(pair != nullptr);
  const int a = pair->members[0], b = pair->members[1];

  // brute force: solve for the span coordinates by least squares on the raw vectors
  MatrixXcd U(modes[a].u.size(), 2);
  U << modes[a].u, modes[b].u;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 4; ++trial)
  {
    const Eigen::Vector2cd x(Complex(u(rng), u(rng)), Complex(u(rng), u(rng)));
    const VectorXcd t = U * x;
    const Eigen::Vector2cd coords = U.colPivHouseholderQr().solve(t);
    const VectorXcd brute =
      coords[0] * (I / modes[a].beta) * w_of(f, modes[a].u) + coords[1] * (I / modes[b].beta) * w_of(f, modes[b].u);
    CHECK((apply_dtn(f.dtn, t) - brute).norm() <= 1e-8 * brute.norm());
  }
  // the Gram path agrees with the dense-Gram reference
  for (int j : {a, b})
  {
    const VectorXcd Nu = apply_dtn(f.dtn, modes[j].u);
    const VectorXcd ref = (I / modes[j].beta) * w_of(f, modes[j].u);
    CHECK((Nu - ref).norm() <= 1e-8 * ref.norm());
  }
}

TEST_CASE("energy sign test")
{
  const auto &f = rect16();
  const auto e = outgoing_sign(f.res.modes, f.res.clusters);
  CHECK(e.sign == 1);
  CHECK(e.basis == "propagating");
  CHECK(e.votes == 3);

  // below the first cutoff the convention is kept
  SolveOptions o;
  o.omega = 2.0;
  o.num_modes = 8;
  const auto r = solve_modes(f.mesh, uniform_materials(f.mesh, 1, 1), o);
  const auto ev = outgoing_sign(r.modes, r.clusters);
  CHECK(ev.sign == 1);
  CHECK(ev.basis == "default");
  CHECK(ev.votes == 0);
  CHECK(outgoing_sign({}, {}).basis == "default");

  // a forced wrong sign makes propagating modes absorb energy
  DtnOptions bad;
  bad.sign = -1;
  const auto dn = build_dtn(f.res.blocks, f.res.omega, f.res.modes, f.res.clusters, bad);
  const Complex p = f.res.modes[0].u.dot(apply_dtn(dn, f.res.modes[0].u));
  CHECK(-p.imag() < 0.0);
}

TEST_CASE("empty modeset and apply")
{
  const auto &f = rect16();
  const auto empty = build_dtn(f.res.blocks, f.res.omega, {}, {});
  CHECK(empty.N.rows() == f.res.dofs.num_edge_dofs());
  CHECK(empty.N.norm() == 0.0);

  const int n = f.dtn.num_edge_dofs();
  CHECK(apply_dtn(f.dtn, VectorXcd::Zero(n)).norm() == 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  VectorXcd x(n), y(n);
  for (int i = 0; i < n; ++i)
  {
    x[i] = Complex(u(rng), u(rng));
    y[i] = Complex(u(rng), u(rng));
  }
  const Complex al(0.3, -2.0);
  const VectorXcd lhs = apply_dtn(f.dtn, al * x + y);
  const VectorXcd rhs = al * apply_dtn(f.dtn, x) + apply_dtn(f.dtn, y);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  CHECK_THROWS_AS(apply_dtn(f.dtn, VectorXcd::Zero(n + 1)), Error);

  // complex symmetric for real-vector modes
  CHECK(f.dtn.param("complex_symmetric") == "yes");
  CHECK((f.dtn.N - f.dtn.N.transpose()).norm() <= 1e-12 * f.dtn.N.norm());
}

TEST_CASE("degenerate clusters are refused")
{
  const auto &f = rect16();
  auto clusters = f.res.clusters;
  for (auto &c : clusters)
  {
    if (c.members.size() == 2)
    {
      c.degenerate = true;
      break;
    }
  }
  try
  {
    build_dtn(f.res.blocks, f.res.omega, f.res.modes, clusters);
    FAIL("expected an error");
  }
  catch (const Error &e)
  {
    CHECK(std::string(e.what()).find("excluded modes") != std::string::npos);
  }
  DtnOptions skip;
  skip.skip_degenerate = true;
  const auto d = build_dtn(f.res.blocks, f.res.omega, f.res.modes, clusters, skip);
  CHECK(d.num_modes() == f.dtn.num_modes() - 2);
  CHECK(!d.param("excluded_modes").empty());
}

TEST_CASE("truncation")
{
  const auto &f12 = rect16(12);
  const auto &f20 = rect16(20);
  // propagating-mode trace: the extra evanescent modes only see interpolation-level leakage
  const RectField te10 = rect_field(RectKind::TE, 1, 0, 1.0, 0.5);
  const VectorXcd t =
    interpolate_hcurl(f12.mesh, f12.res.dofs, [&](double x, double y) { return te10.e(x, y); }).cast<Complex>();
  const VectorXcd n12 = apply_dtn(f12.dtn, t);
  const VectorXcd n20 = apply_dtn(f20.dtn, t);
  CHECK((n20 - n12).norm() <= 1e-2 * n12.norm());
  // exact mode traces see no difference at all
  const VectorXcd u = f12.res.modes[0].u;
  CHECK((apply_dtn(f20.dtn, u) - apply_dtn(f12.dtn, u)).norm() <= 1e-8 * apply_dtn(f12.dtn, u).norm());

  CHECK((dtn_from_factors(f12.dtn, f12.dtn.num_modes()) - f12.dtn.N).norm() <= 1e-12 * f12.dtn.N.norm());
  CHECK(dtn_from_factors(f12.dtn, 0).norm() == 0.0);
  const double t12 = truncation_indicator(f12.dtn);
  CHECK(t12 > 0.0);
  CHECK(t12 < 1.0);
}

TEST_CASE("export and import")
{
  const Fixture &f8 = [] () -> const Fixture & {
    static Fixture f;
    f.mesh = test::rect(8);
    SolveOptions o;
    o.omega = 6.5;
    o.num_modes = 8;
    f.res = solve_modes(f.mesh, uniform_materials(f.mesh, 1, 1), o);
    DtnOptions d;
    d.fingerprint = fingerprint_hex(mesh_fingerprint(f.mesh));
    d.params = {{"pencil", "vd2"}};
    f.dtn = build_dtn(f.res.blocks, f.res.omega, f.res.modes, f.res.clusters, d);
    return f;
  }();
  const auto dir = test::tmp_dir();
  const auto path = dir / "rt.wgdtn";
  export_dtn(f8.dtn, path);
  const DtnMatrix back = import_dtn(path, f8.dtn.fingerprint);
  CHECK(back.N == f8.dtn.N);
  CHECK(back.W == f8.dtn.W);
  CHECK(back.factors == f8.dtn.factors);
  CHECK(back.omega == f8.dtn.omega);
  CHECK(back.sign == f8.dtn.sign);
  CHECK(back.params == f8.dtn.params);
  REQUIRE(back.clusters.size() == f8.dtn.clusters.size());
  for (std::size_t k = 0; k < back.clusters.size(); ++k)
  {
    CHECK(back.clusters[k].members == f8.dtn.clusters[k].members);
    CHECK(back.clusters[k].gram == f8.dtn.clusters[k].gram);
  }
  for (int j = 0; j < back.num_modes(); ++j)
  {
    CHECK(back.modes[j].beta == f8.dtn.modes[j].beta);
    CHECK(back.modes[j].classification == f8.dtn.modes[j].classification);
  }
  // second serialization is byte-identical
  CHECK(serialize_dtn(back) == test::slurp(path));

  // factored-only file rebuilds N
  const DtnMatrix lean = parse_dtn(serialize_dtn(f8.dtn, false));
  CHECK((lean.N - f8.dtn.N).norm() <= 1e-13 * f8.dtn.N.norm());

  // wrong fingerprint
  CHECK_THROWS_AS(import_dtn(path, std::string("0123456789abcdef")), Error);
  CHECK_THROWS_AS(import_dtn(dir / "missing.wgdtn"), Error);

  // truncated file -> parse error with byte offset
  const std::string text = test::slurp(path);
  try
  {
    parse_dtn(text.substr(0, text.size() / 2));
    FAIL("expected a parse error");
  }
  catch (const ParseError &e)
  {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
  // version mismatch
  std::string v2 = text;
  v2.replace(0, 6, "WGDTN2");
  try
  {
    parse_dtn(v2);
    FAIL("expected a version error");
  }
  catch (const Error &e)
  {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dtn(text + "junk\n"), Error);
  CHECK_THROWS_AS(parse_dtn(""), Error);
}
