#pragma once

#include <numbers>

namespace mtjsnn {

// CODATA 2018 values. gamma is the electron gyromagnetic ratio magnitude.
struct PhysicalConstants {
  double gamma = 1.76085963023e11;     // rad/(s*T)
  double hbar = 1.054571817e-34;       // J*s
  double e_charge = 1.602176634e-19;   // C
  double mu0 = 1.25663706212e-6;       // T*m/A
  double kB = 1.380649e-23;            // J/K

  // gamma expressed against H in A/m, i.e. mu0*|gamma| in m/(A*s).
  constexpr double gamma_h() const { return mu0 * gamma; }
};

inline constexpr PhysicalConstants kPhysics{};

}  // namespace mtjsnn
