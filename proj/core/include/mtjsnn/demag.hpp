#pragma once

namespace mtjsnn {

struct DemagFactors {
  double xx = 1.0 / 3.0;
  double yy = 1.0 / 3.0;
  double zz = 1.0 / 3.0;

  double sum() const { return xx + yy + zz; }
};

// Demagnetizing factors of a uniformly magnetized rectangular prism with edges
// `length` (x), `width` (y) and `thickness` (z), from Aharoni's closed form
// (J. Appl. Phys. 83, 3432). Throws InvalidArgument for non-positive edges.
DemagFactors demag_factors_rect_prism(double length, double width, double thickness);

}  // namespace mtjsnn
