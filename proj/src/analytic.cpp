#include "wgm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "wgm/error.hpp"

namespace wgm
{

namespace
{

constexpr double kPi = std::numbers::pi;

void check_indices(RectKind kind, int m, int n)
{
  if (m < 0 || n < 0)
  {
    throw Error(ErrorKind::Validation, "analytic", "mode indices must be nonnegative");
  }
  if (kind == RectKind::TE && m == 0 && n == 0)
  {
    throw Error(ErrorKind::Validation, "analytic", "TE00 does not exist");
  }
  if (kind == RectKind::TM && (m == 0 || n == 0))
  {
    throw Error(ErrorKind::Validation, "analytic", "TM modes need m >= 1 and n >= 1");
  }
}

void check_dims(double a, double b)
{
  if (!(a > 0.0) || !(b > 0.0))
  {
    throw Error(ErrorKind::Validation, "analytic", "rectangle sides must be positive");
  }
}

}  // namespace

const char *kind_name(RectKind kind) { return kind == RectKind::TE ? "TE" : "TM"; }

std::string RectMode::label() const
{
  return std::string(kind_name(kind)) + std::to_string(m) + std::to_string(n);
}

double rect_cutoff_sq(int m, int n, double a, double b)
{
  const double kx = m * kPi / a, ky = n * kPi / b;
  return kx * kx + ky * ky;
}

double rect_beta(RectKind kind, int m, int n, double a, double b, double omega, double eps,
                 double mu)
{
  check_indices(kind, m, n);
  check_dims(a, b);
  if (!(omega > 0.0) || !(eps > 0.0) || !(mu > 0.0))
  {
    throw Error(ErrorKind::Validation, "analytic", "omega, eps and mu must be positive");
  }
  return omega * omega * eps * mu - rect_cutoff_sq(m, n, a, b);
}

RectField::RectField(RectKind kind, int m, int n, double a, double b)
  : kind_(kind), kx_(m * kPi / a), ky_(n * kPi / b)
{
  check_indices(kind, m, n);
  check_dims(a, b);
}

std::array<double, 2> RectField::e(double x, double y) const
{
  const double cx = std::cos(kx_ * x), sx = std::sin(kx_ * x);
  const double cy = std::cos(ky_ * y), sy = std::sin(ky_ * y);
  if (kind_ == RectKind::TE)
  {
    return {-ky_ * cx * sy, kx_ * sx * cy};
  }
  const double k2 = kc_sq();
  return {kx_ * cx * sy / k2, ky_ * sx * cy / k2};
}

double RectField::e3(double x, double y) const
{
  if (kind_ == RectKind::TE)
  {
    return 0.0;
  }
  return std::sin(kx_ * x) * std::sin(ky_ * y);
}

double RectField::curl(double x, double y) const
{
  if (kind_ == RectKind::TM)
  {
    return 0.0;
  }
  return kc_sq() * std::cos(kx_ * x) * std::cos(ky_ * y);
}

std::array<double, 2> RectField::curl_curl(double x, double y) const
{
  if (kind_ == RectKind::TM)
  {
    return {0.0, 0.0};
  }
  // (d_y c, -d_x c) for c = kc^2 cos cos
  const double k2 = kc_sq();
  return {-k2 * ky_ * std::cos(kx_ * x) * std::sin(ky_ * y),
          k2 * kx_ * std::sin(kx_ * x) * std::cos(ky_ * y)};
}

std::array<double, 2> RectField::grad_e3(double x, double y) const
{
  if (kind_ == RectKind::TE)
  {
    return {0.0, 0.0};
  }
  return {kx_ * std::cos(kx_ * x) * std::sin(ky_ * y), ky_ * std::sin(kx_ * x) * std::cos(ky_ * y)};
}

double RectField::div_e(double x, double y) const
{
  if (kind_ == RectKind::TE)
  {
    return 0.0;
  }
  return -std::sin(kx_ * x) * std::sin(ky_ * y);
}

double RectField::laplace_e3(double x, double y) const
{
  return -kc_sq() * e3(x, y);
}

RectField rect_field(RectKind kind, int m, int n, double a, double b)
{
  return RectField(kind, m, n, a, b);
}

RectModeList rect_mode_list(double a, double b, double omega, double eps, double mu, int count)
{
  if (count < 1)
  {
    throw Error(ErrorKind::Validation, "analytic", "rect_mode_list: count must be >= 1");
  }
  check_dims(a, b);
  RectModeList out;
  const double k2 = omega * omega * eps * mu;
  // Every mode with index above `count` in either direction is beaten by `count` modes along
  // the axes, and every propagating mode has m < k a / pi, n < k b / pi.
  const double k = std::sqrt(k2);
  const int mmax = std::max(count, static_cast<int>(std::ceil(k * a / kPi)) + 1);
  const int nmax = std::max(count, static_cast<int>(std::ceil(k * b / kPi)) + 1);
  std::vector<RectMode> all;
  for (int m = 0; m <= mmax; ++m)
  {
    for (int n = 0; n <= nmax; ++n)
    {
      for (RectKind kind : {RectKind::TE, RectKind::TM})
      {
        if ((kind == RectKind::TE && m == 0 && n == 0) ||
            (kind == RectKind::TM && (m == 0 || n == 0)))
        {
          continue;
        }
        RectMode rm{kind, m, n, a, b, rect_beta(kind, m, n, a, b, omega, eps, mu)};
        if (rm.beta_sq > 0.0)
        {
          ++out.num_propagating;
        }
        all.push_back(rm);
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const RectMode &p, const RectMode &q) {
    if (p.beta_sq != q.beta_sq)
    {
      return p.beta_sq > q.beta_sq;
    }
    return std::tuple(static_cast<int>(p.kind), p.m, p.n) <
           std::tuple(static_cast<int>(q.kind), q.m, q.n);
  });
  all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(count)));
  out.modes = std::move(all);
  return out;
}

}  // namespace wgm
