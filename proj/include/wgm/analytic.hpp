#ifndef WGM_ANALYTIC_HPP
#define WGM_ANALYTIC_HPP

#include <array>
#include <string>
#include <vector>

namespace wgm
{

// Closed-form modes of the hollow rectangle [0,a] x [0,b] with PEC walls and constant eps, mu.
enum class RectKind
{
  TE,
  TM
};

const char *kind_name(RectKind kind);

struct RectMode
{
  RectKind kind = RectKind::TE;
  int m = 0, n = 0;
  double a = 1.0, b = 1.0;
  double beta_sq = 0.0;

  std::string label() const;  // e.g. "TE10"
};

// beta^2 = w^2 eps mu - (m pi / a)^2 - (n pi / b)^2. TE needs (m, n) != (0, 0), TM needs
// m, n >= 1.
double rect_beta(RectKind kind, int m, int n, double a, double b, double omega, double eps = 1.0,
                 double mu = 1.0);

double rect_cutoff_sq(int m, int n, double a, double b);

// Mode profile up to scaling, for eps = mu = 1 in the operators below.
//   TE: E3 = 0, E = (d_y H3, -d_x H3), H3 = cos(kx x) cos(ky y)
//   TM: E3 = sin(kx x) sin(ky y), E = grad E3 / kc^2
// e3() is the linearized axial field i beta E3 scaled consistently with e(); with it
//   curl curl E - w^2 E + grad e3 + beta^2 E = 0 and  lap e3 + w^2 e3 = -beta^2 div E.
class RectField
{
public:
  RectField(RectKind kind, int m, int n, double a, double b);

  std::array<double, 2> e(double x, double y) const;
  double e3(double x, double y) const;
  double curl(double x, double y) const;  // d_x E_y - d_y E_x
  std::array<double, 2> curl_curl(double x, double y) const;
  std::array<double, 2> grad_e3(double x, double y) const;
  double div_e(double x, double y) const;
  double laplace_e3(double x, double y) const;

  RectKind kind() const { return kind_; }
  double kc_sq() const { return kx_ * kx_ + ky_ * ky_; }

private:
  RectKind kind_;
  double kx_, ky_;
};

RectField rect_field(RectKind kind, int m, int n, double a, double b);

struct RectModeList
{
  std::vector<RectMode> modes;  // descending beta^2; TE before TM on ties, then by (m, n)
  int num_propagating = 0;      // beta^2 > 0 among all modes of the guide
};

RectModeList rect_mode_list(double a, double b, double omega, double eps, double mu, int count);

}  // namespace wgm

#endif  // WGM_ANALYTIC_HPP
