#include "mtjsnn/llgs.hpp"

#include <cmath>
#include <ostream>

#include "mtjsnn/csv.hpp"

namespace mtjsnn {

double she_efficiency(const DeviceParams& p) {
  const double ratio = p.hm_thickness / p.spin_flip_length;
  return std::numbers::pi * p.free_layer_width / (4.0 * p.hm_thickness) * p.spin_hall_angle *
         (1.0 - 1.0 / std::cosh(ratio));
}

namespace {

// beta per ampere: hbar / (2 e mu0 Ms t_FL) / (hm cross-section).
double beta_per_amp(const DeviceParams& p) {
  if (!(p.free_layer_thickness > 0.0)) {
    throw InvalidArgument("stt_torque: free-layer thickness must be positive");
  }
  const auto& c = kPhysics;
  return c.hbar / (2.0 * c.e_charge * c.mu0 * p.saturation_magnetization * p.free_layer_thickness) /
         p.hm_cross_section();
}

}  // namespace

Vec3 stt_torque(const Vec3& m, const Vec3& mp, double charge_current, const DeviceParams& params) {
  const double beta = beta_per_amp(params) * charge_current;
  const double eps = she_efficiency(params);
  return kPhysics.gamma_h() * beta * cross(m, eps * cross(m, mp));
}

double thermal_field_sigma(const DeviceParams& p, double dt) {
  const auto& c = kPhysics;
  return std::sqrt(2.0 * p.gilbert_damping * c.kB * p.temperature /
                   (c.gamma_h() * c.mu0 * dt * p.saturation_magnetization * p.volume()));
}

Vec3 thermal_field(const DeviceParams& params, double dt, const Vec3& standard_normals) {
  return standard_normals * thermal_field_sigma(params, dt);
}

Vec3 demag_field(const Vec3& m, const DeviceParams& p) {
  const auto& n = p.demag_factors;
  const double ms = p.saturation_magnetization;
  return {-ms * n.xx * m.x, -ms * n.yy * m.y, -ms * n.zz * m.z};
}

Vec3 effective_field(const Vec3& m, const DeviceParams& params, const Vec3& thermal,
                     const Vec3& external) {
  return thermal + demag_field(m, params) + external;
}

double magnetic_energy(const Vec3& m, const DeviceParams& p) {
  const auto& n = p.demag_factors;
  const double ms = p.saturation_magnetization;
  return 0.5 * kPhysics.mu0 * ms * ms * p.volume() *
         (n.xx * m.x * m.x + n.yy * m.y * m.y + n.zz * m.z * m.z);
}

LlgsStepper::LlgsStepper(const DeviceParams& params, const SimConfig& config)
    : dt_(config.dt),
      dtau_(kPhysics.gamma_h() * config.dt / (1.0 + params.gilbert_damping * params.gilbert_damping)),
      alpha_(params.gilbert_damping),
      sigma_(params.temperature > 0.0 ? thermal_field_sigma(params, config.dt) : 0.0),
      torque_per_amp_(beta_per_amp(params) * she_efficiency(params)),
      nms_{params.saturation_magnetization * params.demag_factors.xx,
           params.saturation_magnetization * params.demag_factors.yy,
           params.saturation_magnetization * params.demag_factors.zz},
      ext_(config.external_field),
      renormalize_(config.renormalize_each_step) {
  if (!(config.dt > 0.0)) throw InvalidArgument("SimConfig: dt must be positive");
}

Vec3 heun_step(const Vec3& m, const SimConfig& config, const DeviceParams& params, double current,
               Rng& rng, std::uint64_t step_index) {
  return LlgsStepper(params, config).step(m, current, rng, step_index);
}

Trajectory integrate(const Vec3& m0, const SimConfig& config, const DeviceParams& params,
                     const CurrentWaveform& current, std::uint64_t trajectory_index) {
  if (!(config.duration >= config.dt)) throw InvalidArgument("SimConfig: duration must be >= dt");
  const std::size_t stride = config.record_stride == 0 ? 1 : config.record_stride;
  Trajectory traj;
  const auto steps = static_cast<std::size_t>(config.duration / config.dt + 0.5);
  traj.times.reserve(steps / stride + 2);
  traj.m.reserve(steps / stride + 2);
  std::size_t index = 0;
  evolve(
      m0, config, params, current,
      [&](double t, const Vec3& m) {
        if (index++ % stride == 0) {
          traj.times.push_back(t);
          traj.m.push_back(m);
        }
      },
      trajectory_index);
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "time_s,mx,my,mz\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const auto& m = trajectory.m[i];
    out << fmt_g17(trajectory.times[i]) << ',' << fmt_g17(m.x) << ',' << fmt_g17(m.y) << ','
        << fmt_g17(m.z) << '\n';
  }
}

}  // namespace mtjsnn
