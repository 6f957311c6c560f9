#include "mtjsnn/demag.hpp"

#include <cmath>
#include <numbers>

#include "mtjsnn/errors.hpp"

namespace mtjsnn {
namespace {

// Factor along the c half-edge of a prism with half-edges a, b, c.
// log((r-a)/(r+a)) is written as -2*asinh(a/sqrt(b^2+c^2)) and friends to avoid
// cancellation for very flat prisms.
double aharoni_dz(double a, double b, double c) {
  const double a2 = a * a, b2 = b * b, c2 = c * c;
  const double r = std::sqrt(a2 + b2 + c2);
  const double ab = std::sqrt(a2 + b2);
  const double bc = std::sqrt(b2 + c2);
  const double ac = std::sqrt(a2 + c2);
  const double abc = a * b * c;

  double t = 0.0;
  t += (b2 - c2) / (2.0 * b * c) * (-2.0 * std::asinh(a / bc));
  t += (a2 - c2) / (2.0 * a * c) * (-2.0 * std::asinh(b / ac));
  t += b / (2.0 * c) * (2.0 * std::asinh(a / b));
  t += a / (2.0 * c) * (2.0 * std::asinh(b / a));
  t += c / (2.0 * a) * (-2.0 * std::asinh(b / c));
  t += c / (2.0 * b) * (-2.0 * std::asinh(a / c));
  t += 2.0 * std::atan(a * b / (c * r));
  t += (a2 * a + b2 * b - 2.0 * c2 * c) / (3.0 * abc);
  t += (a2 + b2 - 2.0 * c2) / (3.0 * abc) * r;
  t += c / (a * b) * (ac + bc);
  t -= (ab * ab * ab + bc * bc * bc + ac * ac * ac) / (3.0 * abc);
  return t / std::numbers::pi;
}

}  // namespace

DemagFactors demag_factors_rect_prism(double length, double width, double thickness) {
  if (!(length > 0.0) || !(width > 0.0) || !(thickness > 0.0)) {
    throw InvalidArgument("demag_factors_rect_prism: all prism dimensions must be positive");
  }
  const double a = 0.5 * length, b = 0.5 * width, c = 0.5 * thickness;
  DemagFactors n;
  n.xx = aharoni_dz(b, c, a);
  n.yy = aharoni_dz(c, a, b);
  n.zz = aharoni_dz(a, b, c);
  return n;
}

}  // namespace mtjsnn
