#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wgm/analytic.hpp"
#include "wgm/error.hpp"

using namespace wgm;

namespace
{
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("rect_beta reference values")
{
  const double te10 = rect_beta(RectKind::TE, 1, 0, 1, 0.5, 6.5);
  CHECK(te10 == doctest::Approx(42.25 - kPi * kPi).epsilon(1e-15));
  CHECK(te10 == doctest::Approx(32.3804).epsilon(1e-5));
  CHECK(std::sqrt(te10) == doctest::Approx(5.6904).epsilon(1e-4));
  const double te01 = rect_beta(RectKind::TE, 0, 1, 1, 0.5, 6.5);
  const double te20 = rect_beta(RectKind::TE, 2, 0, 1, 0.5, 6.5);
  CHECK(te01 == te20);
  CHECK(te01 == doctest::Approx(2.7716).epsilon(1e-4));
  CHECK(std::sqrt(te01) == doctest::Approx(1.6648).epsilon(1e-4));
  CHECK(rect_beta(RectKind::TM, 1, 1, 1, 0.5, 6.5) == doctest::Approx(-7.098).epsilon(1e-3));
  CHECK(rect_beta(RectKind::TE, 1, 0, 1, 0.5, 6.5, 2.0, 1.5) ==
        doctest::Approx(42.25 * 3.0 - kPi * kPi));
}

TEST_CASE("invalid indices")
{
  CHECK_THROWS_AS(rect_beta(RectKind::TE, 0, 0, 1, 0.5, 1), Error);
  CHECK_THROWS_AS(rect_beta(RectKind::TM, 1, 0, 1, 0.5, 1), Error);
  CHECK_THROWS_AS(rect_beta(RectKind::TM, 0, 2, 1, 0.5, 1), Error);
  CHECK_THROWS_AS(rect_beta(RectKind::TE, -1, 1, 1, 0.5, 1), Error);
  CHECK_THROWS_AS(rect_field(RectKind::TM, 2, 0, 1, 0.5), Error);
  CHECK_THROWS_AS(rect_beta(RectKind::TE, 1, 0, 1, 0.5, 0.0), Error);
}

TEST_CASE("rect_beta decreases in m and n")
{
  for (int m = 1; m < 5; ++m)
  {
    for (int n = 1; n < 5; ++n)
    {
      const double b = rect_beta(RectKind::TM, m, n, 1, 0.5, 6.5);
      CHECK(rect_beta(RectKind::TM, m + 1, n, 1, 0.5, 6.5) < b);
      CHECK(rect_beta(RectKind::TM, m, n + 1, 1, 0.5, 6.5) < b);
      CHECK(rect_beta(RectKind::TE, m, n, 1, 0.5, 6.5) == b);  // TE/TM degeneracy
    }
  }
}

TEST_CASE("mode list")
{
  const auto l = rect_mode_list(1, 0.5, 6.5, 1, 1, 6);
  CHECK(l.num_propagating == 3);
  REQUIRE(l.modes.size() == 6);
  CHECK(l.modes[0].label() == "TE10");
  CHECK(l.modes[1].label() == "TE01");
  CHECK(l.modes[2].label() == "TE20");
  CHECK(l.modes[3].label() == "TE11");
  CHECK(l.modes[4].label() == "TM11");
  for (std::size_t k = 1; k < l.modes.size(); ++k) CHECK(l.modes[k].beta_sq <= l.modes[k - 1].beta_sq);

  CHECK(rect_mode_list(1, 0.5, 3.0, 1, 1, 5).num_propagating == 0);
  const auto one = rect_mode_list(1, 0.5, 6.5, 1, 1, 1);
  REQUIRE(one.modes.size() == 1);
  CHECK(one.modes[0].label() == "TE10");
  CHECK_THROWS_AS(rect_mode_list(1, 0.5, 6.5, 1, 1, 0), Error);
}

TEST_CASE("mode list matches brute-force enumeration")
{
  // Independent count of k_c^2 < w^2 over a generous index box.
  for (double w : {2.0, 6.5, 9.0, 14.0})
  {
    int count = 0;
    for (int m = 0; m < 40; ++m)
      for (int n = 0; n < 40; ++n)
      {
        const double kc2 = std::pow(m * kPi / 1.0, 2) + std::pow(n * kPi / 0.5, 2);
        if (kc2 < w * w)
        {
          count += (m || n) ? 1 : 0;  // TE
          count += (m && n) ? 1 : 0;  // TM
        }
      }
    CHECK(rect_mode_list(1, 0.5, w, 1, 1, 3).num_propagating == count);
  }
}

TEST_CASE("fields satisfy boundary conditions")
{
  const double a = 1.0, b = 0.5;
  for (auto [kind, m, n] : {std::tuple{RectKind::TE, 1, 0}, std::tuple{RectKind::TE, 0, 1},
                            std::tuple{RectKind::TE, 2, 3}, std::tuple{RectKind::TM, 1, 1},
                            std::tuple{RectKind::TM, 3, 2}})
  {
    const RectField f = rect_field(kind, m, n, a, b);
    for (int k = 0; k <= 20; ++k)
    {
      const double s = k / 20.0;
      CHECK(std::abs(f.e(s * a, 0.0)[0]) < 1e-13);  // tangential on y = 0
      CHECK(std::abs(f.e(s * a, b)[0]) < 1e-13);
      CHECK(std::abs(f.e(0.0, s * b)[1]) < 1e-13);  // tangential on x = 0
      CHECK(std::abs(f.e(a, s * b)[1]) < 1e-13);
      CHECK(std::abs(f.e3(s * a, 0.0)) < 1e-13);
      CHECK(std::abs(f.e3(a, s * b)) < 1e-13);
    }
  }
  // TE10 across the guide: E = (0, c sin(pi x / a))
  const RectField te10 = rect_field(RectKind::TE, 1, 0, a, b);
  for (double y : {0.1, 0.25, 0.4})
  {
    CHECK(te10.e(0.5, y)[0] == 0.0);
    CHECK(te10.e(0.3, y)[1] == doctest::Approx(kPi * std::sin(0.3 * kPi)));
  }
}

TEST_CASE("pointwise PDE residual at random points")
{
  const double a = 1.0, b = 0.5, w = 6.5;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, a), uy(0.0, b);
  for (auto [kind, m, n] : {std::tuple{RectKind::TE, 1, 0}, std::tuple{RectKind::TE, 2, 1},
                            std::tuple{RectKind::TM, 1, 1}, std::tuple{RectKind::TM, 2, 3}})
  {
    const RectField f = rect_field(kind, m, n, a, b);
    const double b2 = rect_beta(kind, m, n, a, b, w);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k)
    {
      const double x = ux(rng), y = uy(rng);
      const auto e = f.e(x, y);
      const auto cc = f.curl_curl(x, y);
      const auto g = f.grad_e3(x, y);
      for (int c = 0; c < 2; ++c)
      {
        const double r = cc[c] - w * w * e[c] + g[c] + b2 * e[c];
        worst = std::max(worst, std::abs(r));
      }
      const double r2 = f.laplace_e3(x, y) + w * w * f.e3(x, y) + b2 * f.div_e(x, y);
      worst = std::max(worst, std::abs(r2));
    }
    CHECK(worst <= 1e-12 * std::max(1.0, f.kc_sq() * std::sqrt(f.kc_sq())));
  }
}

TEST_CASE("analytic derivatives agree with finite differences")
{
  const double h = 1e-5;
  for (auto [kind, m, n] : {std::tuple{RectKind::TE, 2, 1}, std::tuple{RectKind::TM, 1, 2}})
  {
    const RectField f = rect_field(kind, m, n, 1.0, 0.5);
    for (auto [x, y] : {std::pair{0.31, 0.17}, std::pair{0.77, 0.41}})
    {
      const double dxEy = (f.e(x + h, y)[1] - f.e(x - h, y)[1]) / (2 * h);
      const double dyEx = (f.e(x, y + h)[0] - f.e(x, y - h)[0]) / (2 * h);
      CHECK(f.curl(x, y) == doctest::Approx(dxEy - dyEx).epsilon(1e-7));
      const double dxEx = (f.e(x + h, y)[0] - f.e(x - h, y)[0]) / (2 * h);
      const double dyEy = (f.e(x, y + h)[1] - f.e(x, y - h)[1]) / (2 * h);
      CHECK(f.div_e(x, y) == doctest::Approx(dxEx + dyEy).epsilon(1e-7));
      const double cc0 = (f.curl(x, y + h) - f.curl(x, y - h)) / (2 * h);
      const double cc1 = -(f.curl(x + h, y) - f.curl(x - h, y)) / (2 * h);
      CHECK(f.curl_curl(x, y)[0] == doctest::Approx(cc0).epsilon(1e-7));
      CHECK(f.curl_curl(x, y)[1] == doctest::Approx(cc1).epsilon(1e-7));
      const double g0 = (f.e3(x + h, y) - f.e3(x - h, y)) / (2 * h);
      CHECK(f.grad_e3(x, y)[0] == doctest::Approx(g0).epsilon(1e-7));
    }
  }
}
