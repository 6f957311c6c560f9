#pragma once

#include <string>
#include <vector>

#include "mtjsnn/demag.hpp"

namespace mtjsnn {

// Geometry, magnetic and spin-Hall parameters of one SHE-MTJ. SI units throughout.
// Axes: x along the free-layer length (easy axis, pinned-layer direction), y along
// the width, z along the thickness.
struct DeviceParams {
  std::string name;
  double free_layer_length = 0.0;       // m
  double free_layer_width = 0.0;        // m
  double free_layer_thickness = 0.0;    // m
  double hm_thickness = 2e-9;           // m
  double hm_width = 0.0;                // m, 0 means "same as free_layer_width"
  double hm_resistivity = 2e-6;         // ohm*m (200 uOhm*cm, beta-W)
  double saturation_magnetization = 0;  // A/m
  double gilbert_damping = 0.0122;
  double spin_hall_angle = 0.3;
  double spin_flip_length = 3.6e-9;     // m
  double temperature = 300.0;           // K
  double mgo_resistance_p = 0.0;        // ohm
  double mgo_resistance_ap = 0.0;       // ohm
  DemagFactors demag_factors;

  double volume() const { return free_layer_length * free_layer_width * free_layer_thickness; }
  double effective_hm_width() const { return hm_width > 0.0 ? hm_width : free_layer_width; }
  double hm_cross_section() const { return effective_hm_width() * hm_thickness; }
  // Heavy-metal strip resistance under the free-layer footprint.
  double hm_resistance() const { return hm_resistivity * free_layer_length / hm_cross_section(); }
};

// Throws InvalidArgument naming the first violated invariant.
void validate(const DeviceParams& p);

// Builds a device and fills demag_factors from the prism formula.
DeviceParams make_device(std::string name, double length, double width, double thickness,
                         double saturation_magnetization);

// The four reference devices (nominal 1, 2, 10 and 20 kBT barriers).
DeviceParams preset_device_1kbt();
DeviceParams preset_device_2kbt();
DeviceParams preset_device_10kbt();
DeviceParams preset_device_20kbt();
// Ordered by increasing barrier: 1, 2, 10, 20 kBT.
std::vector<DeviceParams> preset_devices();

}  // namespace mtjsnn
