#include "mtjsnn/readout.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mtjsnn/csv.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/parallel.hpp"

namespace mtjsnn {

const char* to_string(OperatingMode mode) {
  return mode == OperatingMode::synchronous ? "sync" : "async";
}

OperatingMode parse_mode(const std::string& text) {
  if (text == "sync" || text == "synchronous") return OperatingMode::synchronous;
  if (text == "async" || text == "asynchronous") return OperatingMode::asynchronous;
  throw InvalidArgument("unknown mode '" + text + "' (expected sync or async)");
}

double ReadCircuitParams::offset() const {
  return std::clamp(inverter_threshold_offset + sigma_level * offset_per_sigma, -0.1, 0.1);
}

void validate(const ReadCircuitParams& c) {
  if (!(c.read_current >= 0.0)) throw InvalidArgument("read_current must be >= 0");
  if (!(c.read_time_sync > 0.0)) throw InvalidArgument("read_time_sync must be > 0");
  if (!(c.tau_rc > 0.0)) throw InvalidArgument("tau_rc must be > 0");
  if (!(c.output_band >= 0.0 && c.output_band < 0.5)) throw InvalidArgument("output_band must be in [0, 0.5)");
  if (c.sigma_level < -2 || c.sigma_level > 2) throw InvalidArgument("sigma_level must be in -2..2");
  if (std::abs(c.inverter_threshold_offset) > 0.1) {
    throw InvalidArgument("inverter_threshold_offset must be in [-0.1, 0.1]");
  }
}

AsyncReader::AsyncReader(const ReadCircuitParams& circuit, double dt, bool initially_p)
    : latch_(initially_p, circuit.input_band),
      gain_(-std::expm1(-dt / circuit.tau_rc)),
      y_(initially_p ? 1.0 : 0.0),
      hi_(0.5 + circuit.output_band),
      lo_(0.5 - circuit.output_band),
      out_(initially_p ? 1 : 0) {}

int read_sync(const Vec3& m_final, const ReadCircuitParams& circuit, double delta_kbt, Rng& rng) {
  const int level = m_final.x > 0.0 ? 1 : 0;
  const double p_flip = retention_failure_probability(delta_kbt, circuit.read_time_sync * 1e9);
  if (p_flip > 0.0 && uniform01(rng) < p_flip) return 1 - level;
  return level;
}

std::vector<ReadSample> read_async_stream(const Trajectory& trajectory, const ReadCircuitParams& circuit) {
  std::vector<ReadSample> out;
  if (trajectory.times.empty()) return out;
  const double dt = trajectory.times.size() > 1 ? trajectory.times[1] - trajectory.times[0] : 1e-12;
  AsyncReader reader(circuit, dt, trajectory.m.front().x > 0.0);
  out.reserve(trajectory.times.size());
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out.push_back({trajectory.times[i], reader.update(trajectory.m[i].x)});
  }
  return out;
}

double apply_read_backaction(double write_current, const ReadCircuitParams& circuit, OperatingMode mode) {
  return mode == OperatingMode::asynchronous ? write_current + circuit.read_current : write_current;
}

double apply_cmos_variation(double mean_output, const ReadCircuitParams& circuit) {
  return std::clamp(mean_output + circuit.offset(), 0.0, 1.0);
}

namespace {

struct PulseCounter {
  double dt;
  int level;
  double run = 0.0, high_time = 0.0, total = 0.0;
  double high_sum = 0.0, low_sum = 0.0;
  std::size_t highs = 0, lows = 0;
  bool seen_edge = false;

  void push(int next) {
    if (next != level) {
      if (seen_edge) {
        if (level == 1) {
          high_sum += run;
          ++highs;
        } else {
          low_sum += run;
          ++lows;
        }
      }
      seen_edge = true;
      run = 0.0;
      level = next;
    }
    run += dt;
    total += dt;
    if (level == 1) high_time += dt;
  }

  PulseStats stats() const {
    PulseStats s;
    s.mean_output = total > 0.0 ? high_time / total : static_cast<double>(level);
    s.high_pulses = highs;
    s.low_pulses = lows;
    s.mean_high_width = highs ? high_sum / static_cast<double>(highs) : 0.0;
    s.mean_low_width = lows ? low_sum / static_cast<double>(lows) : 0.0;
    return s;
  }
};

}  // namespace

PulseStats pulse_statistics(std::span<const ReadSample> samples) {
  if (samples.empty()) return {};
  const double dt = samples.size() > 1 ? samples[1].time - samples[0].time : 0.0;
  PulseCounter counter{dt, samples.front().level};
  for (std::size_t i = 1; i < samples.size(); ++i) counter.push(samples[i].level);
  return counter.stats();
}

PulseStats simulate_read_stream(const DeviceParams& params, double write_current,
                                const ReadCircuitParams& circuit, double duration,
                                std::uint64_t seed, const StreamOptions& options) {
  SimConfig cfg;
  cfg.dt = options.dt;
  const LlgsStepper stepper(params, cfg);
  Rng rng = make_stream(seed, {options.trajectory_index});
  const double current = options.read_backaction
                             ? apply_read_backaction(write_current, circuit, OperatingMode::asynchronous)
                             : write_current;
  const auto steps = static_cast<std::uint64_t>(duration / options.dt + 0.5);
  Vec3 m{1.0, 0.0, 0.0};
  AsyncReader reader(circuit, options.dt, true);
  PulseCounter counter{options.dt, 1};
  for (std::uint64_t i = 0; i < steps; ++i) {
    m = stepper.step(m, current, rng, i);
    counter.push(reader.update(m.x));
  }
  return counter.stats();
}

double calibrate_tau_rc(const DeviceParams& params, const ReadCircuitParams& circuit,
                        double target_width, double duration, std::uint64_t seed, double dt) {
  if (!(target_width > 0.0)) throw InvalidArgument("calibrate_tau_rc: target width must be > 0");
  SimConfig cfg;
  cfg.dt = dt;
  const LlgsStepper stepper(params, cfg);
  Rng rng = make_stream(seed, {0});
  const auto steps = static_cast<std::uint64_t>(duration / dt + 0.5);
  std::vector<unsigned char> latched(steps);
  HysteresisLatch latch(true, circuit.input_band);
  Vec3 m{1.0, 0.0, 0.0};
  for (std::uint64_t i = 0; i < steps; ++i) {
    m = stepper.step(m, 0.0, rng, i);
    latched[i] = latch.update(m.x) ? 1 : 0;
  }
  auto width = [&](double tau) {
    ReadCircuitParams c = circuit;
    c.tau_rc = tau;
    c.input_band = 0.0;  // input is already latched to 0/1
    AsyncReader reader(c, dt, true);
    PulseCounter counter{dt, 1};
    for (unsigned char b : latched) counter.push(reader.update(b ? 1.0 : -1.0));
    return counter.stats().mean_high_width;
  };
  double lo = 1e-12, hi = 100e-9;
  if (width(hi) < target_width) throw InsufficientRange("calibrate_tau_rc: target width not reachable");
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    (width(mid) < target_width ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

SwitchingCharacteristic characterize_async(const DeviceParams& params,
                                           const ReadCircuitParams& circuit,
                                           std::span<const double> currents, double window,
                                           std::uint64_t seed, unsigned workers, double dt) {
  if (!(window > 0.0)) throw InvalidArgument("characterize_async: window must be > 0");
  SwitchingCharacteristic c;
  c.currents.assign(currents.begin(), currents.end());
  c.p_switch.resize(currents.size());
  StreamOptions opts;
  opts.dt = dt;
  parallel_for(currents.size(), workers, [&](std::size_t i) {
    StreamOptions o = opts;
    o.trajectory_index = i;
    c.p_switch[i] = simulate_read_stream(params, currents[i], circuit, window, seed, o).mean_output;
  });
  c.n_trials = 1;
  c.pulse_width = window;
  const SigmoidFit fit = fit_sigmoid(c.currents, c.p_switch);
  c.i_bias = fit.i_bias;
  c.i_o = fit.i_o;
  c.fit_residual = fit.residual;
  c.delta_kbt = calibrate_barrier(params);
  return c;
}

void write_read_stream_csv(std::ostream& out, std::span<const ReadSample> samples) {
  out << "time_s,level\n";
  for (const auto& s : samples) out << fmt_g17(s.time) << ',' << s.level << '\n';
}

}  // namespace mtjsnn
