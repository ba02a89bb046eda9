#ifndef WGM_QUADRATURE_HPP
#define WGM_QUADRATURE_HPP

#include <array>
#include <cmath>

namespace wgm
{

struct TriangleQuadPoint
{
  std::array<double, 3> lambda;  // barycentric coordinates
  double weight;                 // weights sum to 1; multiply by the triangle area
};

// 7-point symmetric rule, exact for polynomials of degree 5.
inline const std::array<TriangleQuadPoint, 7> &triangle_rule_deg5()
{
  static const std::array<TriangleQuadPoint, 7> rule = [] {
    const double s = std::sqrt(15.0);
    const double a1 = (6.0 - s) / 21.0, w1 = (155.0 - s) / 1200.0;
    const double a2 = (6.0 + s) / 21.0, w2 = (155.0 + s) / 1200.0;
    const double b1 = 1.0 - 2.0 * a1, b2 = 1.0 - 2.0 * a2;
    return std::array<TriangleQuadPoint, 7>{{
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
        {{a1, a1, b1}, w1},
        {{a1, b1, a1}, w1},
        {{b1, a1, a1}, w1},
        {{a2, a2, b2}, w2},
        {{a2, b2, a2}, w2},
        {{b2, a2, a2}, w2},
    }};
  }();
  return rule;
}

}  // namespace wgm

#endif  // WGM_QUADRATURE_HPP
