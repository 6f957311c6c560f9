#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mtjsnn/constants.hpp"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/rng.hpp"
#include "mtjsnn/vec3.hpp"

namespace mtjsnn {

// The P state is m_x > 0: the pinned layer points along +x.
inline constexpr Vec3 kPinnedDirection{1.0, 0.0, 0.0};
// Spin polarization injected by a positive charge current. With the torque form
// m x (m x p) a positive current then pushes m toward +x, i.e. favors P.
inline constexpr Vec3 kSpinPolarization{-1.0, 0.0, 0.0};

struct SimConfig {
  double dt = 1e-12;        // s
  double duration = 1e-9;   // s
  std::uint64_t seed = 0;
  bool renormalize_each_step = true;
  Vec3 external_field{};    // A/m
  std::size_t record_stride = 1;  // keep every n-th step in a Trajectory
};

struct Trajectory {
  std::vector<double> times;  // s
  std::vector<Vec3> m;
};

using CurrentWaveform = std::function<double(double)>;

// Spin-current / charge-current ratio of the heavy-metal underlayer.
double she_efficiency(const DeviceParams& params);

// Spin-Hall torque |gamma| * beta * (m x (eps * m x mp)) in rad/s, with
// |gamma| = mu0 * gamma so that beta is in A/m and J_q = I / (hm_width * hm_thickness).
Vec3 stt_torque(const Vec3& m, const Vec3& mp, double charge_current, const DeviceParams& params);

// Standard deviation (A/m) of each thermal-field component for step dt: the
// Brown field sqrt(2 alpha kB T / (|gamma| dt Ms Vol)) with gamma in rad/(s*T),
// divided by mu0 to express it as H.
double thermal_field_sigma(const DeviceParams& params, double dt);

Vec3 thermal_field(const DeviceParams& params, double dt, const Vec3& standard_normals);

// H_demag = -Ms * (Nxx mx, Nyy my, Nzz mz).
Vec3 demag_field(const Vec3& m, const DeviceParams& params);

Vec3 effective_field(const Vec3& m, const DeviceParams& params, const Vec3& thermal,
                     const Vec3& external);

// Shape-anisotropy energy 1/2 mu0 Ms^2 Vol (Nxx mx^2 + Nyy my^2 + Nzz mz^2), J.
double magnetic_energy(const Vec3& m, const DeviceParams& params);

// Precomputed per-device coefficients for the Heun update of
//   dm/dtau = -m x H - alpha m x (m x H) + beta eps [m x (m x p) + alpha m x (m x (m x p))]
// with tau = mu0 |gamma| t / (1 + alpha^2). Immutable; share freely across threads.
class LlgsStepper {
 public:
  LlgsStepper(const DeviceParams& params, const SimConfig& config);

  double dt() const { return dt_; }
  double thermal_sigma() const { return sigma_; }
  // beta * eps per ampere of heavy-metal current, A/m per A.
  double torque_field_per_amp() const { return torque_per_amp_; }

  // One Stratonovich Heun step. The same thermal draw is used in the predictor and
  // the corrector. `zeta` holds three standard normals (ignored when T == 0).
  Vec3 step(const Vec3& m, double current, const Vec3& zeta) const {
    const Vec3 h_th = zeta * sigma_;
    const double a_j = torque_per_amp_ * current;
    const Vec3 k1 = rhs(m, h_th, a_j);
    Vec3 pred = m + k1 * dtau_;
    if (renormalize_) pred = normalized(pred);
    const Vec3 k2 = rhs(pred, h_th, a_j);
    Vec3 next = m + (k1 + k2) * (0.5 * dtau_);
    if (renormalize_) next = normalized(next);
    return next;
  }

  // Draws zeta from rng (unless T == 0) and steps; throws NumericalFailure on NaN/Inf.
  Vec3 step(const Vec3& m, double current, Rng& rng, std::uint64_t step_index) const {
    Vec3 zeta{};
    if (sigma_ > 0.0) {
      std::normal_distribution<double> normal;
      zeta = {normal(rng), normal(rng), normal(rng)};
    }
    Vec3 next = step(m, current, zeta);
    if (!is_finite(next)) throw NumericalFailure("LLGS integration produced a non-finite state", step_index);
    return next;
  }

  // Advances `steps` steps from m under a constant current.
  Vec3 run(Vec3 m, double current, std::size_t steps, Rng& rng, std::uint64_t first_step = 0) const {
    for (std::size_t i = 0; i < steps; ++i) m = step(m, current, rng, first_step + i);
    return m;
  }

 private:
  Vec3 rhs(const Vec3& m, const Vec3& h_th, double a_j) const {
    const Vec3 h{h_th.x + ext_.x - nms_.x * m.x, h_th.y + ext_.y - nms_.y * m.y,
                 h_th.z + ext_.z - nms_.z * m.z};
    const Vec3 mxh = cross(m, h);
    Vec3 out = -mxh - alpha_ * cross(m, mxh);
    if (a_j != 0.0) {
      const Vec3 mxp = cross(m, kSpinPolarization);
      const Vec3 mxmxp = cross(m, mxp);
      out += a_j * (mxmxp + alpha_ * cross(m, mxmxp));
    }
    return out;
  }

  double dt_;
  double dtau_;
  double alpha_;
  double sigma_;
  double torque_per_amp_;
  Vec3 nms_;  // Ms * (Nxx, Nyy, Nzz)
  Vec3 ext_;
  bool renormalize_;
};

// Single step with the thermal draw taken from rng; see LlgsStepper::step.
Vec3 heun_step(const Vec3& m, const SimConfig& config, const DeviceParams& params, double current,
               Rng& rng, std::uint64_t step_index = 0);

// Observer-driven integration: calls observe(time, m) for t = 0 and after every step.
// The thermal stream is derived from (config.seed, trajectory_index).
template <class Waveform, class Observer>
Vec3 evolve(Vec3 m, const SimConfig& config, const DeviceParams& params, Waveform&& current,
            Observer&& observe, std::uint64_t trajectory_index = 0) {
  const LlgsStepper stepper(params, config);
  Rng rng = make_stream(config.seed, {trajectory_index});
  const auto steps = static_cast<std::uint64_t>(config.duration / config.dt + 0.5);
  observe(0.0, m);
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    m = stepper.step(m, current(t), rng, i);
    observe(static_cast<double>(i + 1) * config.dt, m);
  }
  return m;
}

// Records a Trajectory with duration/dt + 1 samples (fewer with record_stride > 1).
Trajectory integrate(const Vec3& m0, const SimConfig& config, const DeviceParams& params,
                     const CurrentWaveform& current, std::uint64_t trajectory_index = 0);

// CSV with header time_s,mx,my,mz and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace mtjsnn
