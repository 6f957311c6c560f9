#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mtjsnn/device_params.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/mtj_device.hpp"
#include "mtjsnn/rng.hpp"

namespace mtjsnn {

enum class OperatingMode { synchronous, asynchronous };

const char* to_string(OperatingMode mode);
OperatingMode parse_mode(const std::string& text);

// Low-pass time constant that gives the 1 kBT device an 8.2 ns mean output pulse.
inline constexpr double kCalibratedTauRc = 1.52e-9;

// Behavioral read path: hysteretic comparator on m_x, first-order RC low-pass,
// output comparator with thresholds 0.5 -/+ output_band.
struct ReadCircuitParams {
  double read_current = 100e-9;  // A
  double r_ref = 0.0;            // ohm, 0 selects sqrt(R_P * R_AP); only enters read energy
  double read_time_sync = 1e-9;  // s
  double tau_rc = kCalibratedTauRc;
  double input_band = 0.5;
  double output_band = 0.2;
  double inverter_threshold_offset = 0.0;  // probability, in [-0.1, 0.1]
  int sigma_level = 0;                     // CMOS corner, one of -2..2
  double offset_per_sigma = 0.02;          // probability shift per sigma of threshold variation

  // Total output-probability offset of this corner, clamped to [-0.1, 0.1].
  double offset() const;
};

void validate(const ReadCircuitParams& c);

struct ReadSample {
  double time = 0.0;  // s
  int level = 0;      // 1 = inverter high = P
};

// Streaming form of read_async_stream; feed one m_x sample per dt.
class AsyncReader {
 public:
  AsyncReader(const ReadCircuitParams& circuit, double dt, bool initially_p);
  int update(double mx) {
    const double x = latch_.update(mx) ? 1.0 : 0.0;
    y_ += (x - y_) * gain_;
    if (out_ == 0 && y_ > hi_) out_ = 1;
    else if (out_ == 1 && y_ < lo_) out_ = 0;
    return out_;
  }
  int level() const { return out_; }

 private:
  HysteresisLatch latch_;
  double gain_;
  double y_;
  double hi_, lo_;
  int out_;
};

// 1 for P. The result is flipped with the retention-failure probability of the read window.
int read_sync(const Vec3& m_final, const ReadCircuitParams& circuit, double delta_kbt, Rng& rng);

// Inverter output for every trajectory sample.
std::vector<ReadSample> read_async_stream(const Trajectory& trajectory, const ReadCircuitParams& circuit);

// Async adds the read current to the HM current; sync read and write never overlap.
double apply_read_backaction(double write_current, const ReadCircuitParams& circuit, OperatingMode mode);

// mean_output + offset(), clamped to [0, 1].
double apply_cmos_variation(double mean_output, const ReadCircuitParams& circuit);

struct PulseStats {
  double mean_output = 0.0;      // time-averaged level
  double mean_high_width = 0.0;  // s, completed high pulses only
  double mean_low_width = 0.0;   // s
  std::size_t high_pulses = 0;
  std::size_t low_pulses = 0;
};

PulseStats pulse_statistics(std::span<const ReadSample> samples);

struct StreamOptions {
  double dt = 1e-12;
  bool read_backaction = true;
  std::uint64_t trajectory_index = 0;
};

// Integrates the device under a constant write current and reads it asynchronously,
// without storing the trajectory.
PulseStats simulate_read_stream(const DeviceParams& params, double write_current,
                                const ReadCircuitParams& circuit, double duration,
                                std::uint64_t seed, const StreamOptions& options = {});

// Bisects tau_rc so the zero-current mean high-pulse width equals target_width.
// The same latched trajectory is refiltered at every iterate.
double calibrate_tau_rc(const DeviceParams& params, const ReadCircuitParams& circuit,
                        double target_width, double duration, std::uint64_t seed,
                        double dt = 1e-12);

// Average inverter output over `window` at each current, with the logistic fit.
// n_trials is 1; pulse_width holds the averaging window.
SwitchingCharacteristic characterize_async(const DeviceParams& params,
                                           const ReadCircuitParams& circuit,
                                           std::span<const double> currents, double window,
                                           std::uint64_t seed, unsigned workers = default_workers(),
                                           double dt = 1e-12);

// time_s,level
void write_read_stream_csv(std::ostream& out, std::span<const ReadSample> samples);

}  // namespace mtjsnn
