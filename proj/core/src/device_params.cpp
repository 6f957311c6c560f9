#include "mtjsnn/device_params.hpp"

#include <cmath>
#include <utility>

#include "mtjsnn/errors.hpp"

namespace mtjsnn {
namespace {

// Resistance-area product and TMR used to derive R_P / R_AP from the footprint.
constexpr double kResistanceArea = 5e-12;  // ohm*m^2 (5 ohm*um^2)
constexpr double kTmr = 1.5;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("DeviceParams: ") + what);
}

}  // namespace

void validate(const DeviceParams& p) {
  require(p.free_layer_length > 0 && p.free_layer_width > 0 && p.free_layer_thickness > 0,
          "free-layer dimensions must be positive");
  require(p.hm_thickness > 0, "heavy-metal thickness must be positive");
  require(p.hm_width >= 0, "heavy-metal width must be non-negative");
  require(p.hm_resistivity > 0, "heavy-metal resistivity must be positive");
  require(p.saturation_magnetization > 0, "saturation magnetization must be positive");
  require(p.gilbert_damping > 0 && p.gilbert_damping < 1, "damping must lie in (0, 1)");
  require(p.spin_hall_angle >= 0 && p.spin_hall_angle <= 1, "spin Hall angle must lie in [0, 1]");
  require(p.spin_flip_length > 0, "spin-flip length must be positive");
  require(p.temperature >= 0, "temperature must be non-negative");
  require(p.mgo_resistance_ap > p.mgo_resistance_p && p.mgo_resistance_p > 0,
          "require R_AP > R_P > 0");
  const auto& n = p.demag_factors;
  require(n.xx >= 0 && n.yy >= 0 && n.zz >= 0, "demag factors must be non-negative");
  require(std::abs(n.sum() - 1.0) <= 1e-6, "demag factors must sum to 1");
}

DeviceParams make_device(std::string name, double length, double width, double thickness,
                         double saturation_magnetization) {
  DeviceParams p;
  p.name = std::move(name);
  p.free_layer_length = length;
  p.free_layer_width = width;
  p.free_layer_thickness = thickness;
  p.saturation_magnetization = saturation_magnetization;
  p.mgo_resistance_p = kResistanceArea / (length * width);
  p.mgo_resistance_ap = p.mgo_resistance_p * (1.0 + kTmr);
  p.demag_factors = demag_factors_rect_prism(length, width, thickness);
  return p;
}

DeviceParams preset_device_1kbt() { return make_device("1kBT", 25e-9, 10e-9, 0.8e-9, 750e3); }
DeviceParams preset_device_2kbt() { return make_device("2kBT", 42.5e-9, 17e-9, 0.8e-9, 750e3); }
DeviceParams preset_device_10kbt() { return make_device("10kBT", 75e-9, 30e-9, 1.2e-9, 1000e3); }
DeviceParams preset_device_20kbt() { return make_device("20kBT", 100e-9, 40e-9, 1.2e-9, 1000e3); }

std::vector<DeviceParams> preset_devices() {
  return {preset_device_1kbt(), preset_device_2kbt(), preset_device_10kbt(), preset_device_20kbt()};
}

}  // namespace mtjsnn
