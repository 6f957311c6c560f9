#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mtjsnn/device_params.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/parallel.hpp"

namespace mtjsnn {

// Two-state detector on m_x: enters P above +band, AP below -band, holds otherwise.
class HysteresisLatch {
 public:
  explicit HysteresisLatch(bool initially_p, double band = 0.5) : p_(initially_p), band_(band) {}
  bool update(double mx) {
    if (p_) {
      if (mx < -band_) p_ = false;
    } else if (mx > band_) {
      p_ = true;
    }
    return p_;
  }
  bool is_p() const { return p_; }

 private:
  bool p_;
  double band_;
};

struct SwitchingCharacteristic {
  std::vector<double> currents;  // A
  std::vector<double> p_switch;
  int n_trials = 0;
  double pulse_width = 0.0;  // s; for stream-averaged curves, the averaging window
  double i_bias = 0.0;       // A
  double i_o = 0.0;          // A
  double fit_residual = 0.0;
  double delta_kbt = 0.0;

  // sigmoid((current - i_bias) / i_o)
  double probability(double current) const;
};

struct SigmoidFit {
  double i_bias = 0.0;
  double i_o = 0.0;
  double residual = 0.0;  // max |sigmoid - p|
  int iterations = 0;
};

double sigmoid(double x);

// Optional pre-write pulse, e.g. a neuron's reset pulse preceding the write.
struct PrePulse {
  double current = 0.0;   // A
  double duration = 0.0;  // s
};

struct WriteProtocol {
  double dt = 1e-12;
  double warmup = 5e-9;  // thermalization at zero current before forcing the AP basin
  std::optional<PrePulse> pre_pulse;
  double settle = 0.0;   // zero-current time after the pulse before the state is taken
  double band = 0.5;     // hysteresis band of the switching detector
  unsigned workers = default_workers();
};

// Runs one write trial from a thermalized AP state; true if the detector ends in P.
bool write_trial(const DeviceParams& params, double current, double pulse_width,
                 const WriteProtocol& protocol, Rng& rng);

// Monte Carlo P_sw at one current with n_trials independent trials.
double switching_probability(const DeviceParams& params, double current, double pulse_width,
                             int n_trials, std::uint64_t seed, const WriteProtocol& protocol = {});

// Sweeps `currents`, then fits the logistic. Throws InvalidArgument for
// n_trials < 100 or pulse_width <= 0 and NumericalFailure on integrator failure.
SwitchingCharacteristic characterize_switching(const DeviceParams& params, double pulse_width,
                                               std::span<const double> currents, int n_trials,
                                               std::uint64_t seed,
                                               const WriteProtocol& protocol = {});

// Brackets the switching transition with coarse Monte Carlo and returns `points`
// currents spanning roughly P_sw in [0.03, 0.97].
std::vector<double> auto_current_grid(const DeviceParams& params, double pulse_width,
                                      std::uint64_t seed, const WriteProtocol& protocol = {},
                                      int points = 13);

// Damped least-squares (Levenberg-Marquardt) fit of p ~ sigmoid((I - i_bias)/i_o).
// Needs >= 5 points spanning p < 0.2 to p > 0.8, else InsufficientRange.
SigmoidFit fit_sigmoid(std::span<const double> currents, std::span<const double> p_switch);

// Shape-anisotropy barrier 1/2 mu0 Ms^2 Vol (Nyy - Nxx) / (kB T), in kBT.
// Throws InvalidArgument (invalid geometry) when Nyy <= Nxx.
double calibrate_barrier(const DeviceParams& params);

inline constexpr double kDefaultTau0 = 10e-12;  // s

// tau0 * exp(delta)
double retention_time(double delta_kbt, double tau0 = kDefaultTau0);

// 1 - exp(-t_read / exp(delta)) with t_read in nanoseconds.
double retention_failure_probability(double delta_kbt, double t_read_ns);

struct RetentionStats {
  double barrier_height = 0.0;  // kBT
  double tau0 = kDefaultTau0;
  double retention_time = 0.0;  // s
  std::vector<double> dwell_samples;     // s, all completed dwells in time order
  std::vector<double> p_dwell_samples;   // s
  std::vector<double> ap_dwell_samples;  // s
  double p_occupancy = 0.0;              // fraction of time the detector reads P
  std::size_t transitions = 0;

  double mean_p_dwell() const;
  double mean_ap_dwell() const;
  double mean_dwell() const;
};

struct DwellOptions {
  double dt = 1e-12;
  double band = 0.5;
  double tau0 = kDefaultTau0;
};

// Segments a zero-field telegraphic trajectory into P/AP dwells. Throws
// InvalidArgument outside the superparamagnetic regime (barrier >= 5 kBT) and
// InsufficientStatistics with fewer than 20 transitions.
RetentionStats dwell_time_analysis(const DeviceParams& params, double bias_current, double duration,
                                   std::uint64_t seed, const DwellOptions& options = {});

// current_A,p_switch,n_trials
void write_characteristic_csv(std::ostream& out, const SwitchingCharacteristic& c);
// {i_bias_A, i_o_A, pulse_width_s, residual, delta_kbt}
void write_characteristic_json(std::ostream& out, const SwitchingCharacteristic& c);
SwitchingCharacteristic read_characteristic(std::istream& csv, std::istream& json);

}  // namespace mtjsnn
