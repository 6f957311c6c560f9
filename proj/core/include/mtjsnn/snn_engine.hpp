#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/dataset.hpp"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/mtj_device.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/readout.hpp"

namespace mtjsnn {

enum class Fidelity { device, behavioral };

const char* to_string(Fidelity f);
Fidelity parse_fidelity(const std::string& text);

struct ScheduleSync {
  double write = 0.5e-9;
  double rest = 2e-9;
  double read = 1e-9;
  double reset = 0.5e-9;
  double total() const { return write + rest + read + reset; }
};

// What one neuron population is built from.
//   sync:  characteristic is the write-pulse switching curve (0.5 ns)
//   async: characteristic is the averaged inverter output versus write current
struct NeuronModel {
  DeviceParams device;
  SwitchingCharacteristic characteristic;
  double pulse_width = 8.2e-9;   // s, async mean output pulse width at zero drive
  double reset_current = -60e-6; // A, sync over-drive back to AP
};

struct EngineConfig {
  OperatingMode mode = OperatingMode::synchronous;
  Fidelity fidelity = Fidelity::behavioral;
  ScheduleSync schedule;
  ReadCircuitParams circuit;
  double async_tick = 1e-9;   // s
  double dt = 1e-12;          // s, device fidelity only
  double g_o = 5e-6;          // S
  double g_off = 0.0;         // S
  double synapse_sigma = 0.0;
  double supply_noise = 0.0;  // V, shared offset on every row
  unsigned workers = default_workers();

  double timestep() const { return mode == OperatingMode::synchronous ? schedule.total() : async_tick; }
};

// Bias current a mode applies on top of the crossbar drive.
double neuron_bias(const SwitchingCharacteristic& c, OperatingMode mode);

// Spike probability sigmoid((drive + bias - i_bias) / i_o).
double spike_probability(double drive, const SwitchingCharacteristic& c, double bias);

bool neuron_step_behavioral(double drive, const SwitchingCharacteristic& c, double bias, Rng& rng);

// Write protocol whose trials look like one synchronous neuron cycle: reset pulse,
// write pulse, rest. Characterizing with it makes the fitted curve the oracle of
// DeviceNeuron.
WriteProtocol neuron_write_protocol(const ScheduleSync& schedule, double reset_current, double dt = 1e-12);

// LLGS-backed neuron. Sync: one write/rest/read/reset cycle per step. Async: one
// tick of continuous integration under drive plus read current.
class DeviceNeuron {
 public:
  DeviceNeuron(const NeuronModel& model, const EngineConfig& config, Rng rng);
  // drive excludes the sync bias, which the neuron adds itself.
  int step(double drive);
  const Vec3& magnetization() const { return m_; }
  // Sign of m_x at the end of the last reset window (sync only).
  bool last_reset_left_ap() const { return reset_ok_; }

 private:
  Vec3 advance(double current, double duration);
  const NeuronModel* model_;
  EngineConfig config_;
  LlgsStepper stepper_;
  Rng rng_;
  Vec3 m_;
  AsyncReader reader_;
  double bias_;
  std::uint64_t steps_ = 0;
  bool reset_ok_ = true;
};

int neuron_step_device(double drive, DeviceNeuron& neuron);

struct InferenceTrace {
  double timestep_duration = 0.0;                  // s
  std::vector<std::vector<std::uint32_t>> counts;  // cumulative output spike counts per step
  std::vector<int> predicted;                      // argmax of counts per step
  std::vector<double> neuron_j;                    // cumulative HM dissipation per step
  std::vector<double> synapse_j;                   // cumulative crossbar dissipation per step
  std::vector<std::uint64_t> toggles;              // cumulative output transitions per step

  std::size_t steps() const { return predicted.size(); }
};

// A programmed network bound to one neuron model. Immutable; run() is thread-safe.
class SnnSimulator {
 public:
  SnnSimulator(NetworkSpec net, NeuronModel model, EngineConfig config, std::uint64_t program_seed);

  const NetworkSpec& network() const { return net_; }
  const NeuronModel& model() const { return model_; }
  const EngineConfig& config() const { return config_; }
  const std::vector<CrossbarInstance>& crossbars() const { return crossbars_; }  // one per neuron layer

  InferenceTrace run(std::span<const double> image, double total_time, std::uint64_t seed,
                     std::uint64_t image_index = 0) const;

  // Time-averaged outputs of every layer (pooled layers included) over n_steps.
  std::vector<std::vector<double>> empirical_rates(std::span<const double> image, std::size_t n_steps,
                                                   std::uint64_t seed) const;

  // Replaces every Bernoulli draw by its probability; sync mode only.
  std::vector<std::vector<double>> expected_rates(std::span<const double> image) const;

 private:
  template <class Sink>
  void simulate(std::span<const double> image, std::size_t n_steps, Rng& rng, Sink&& sink) const;

  NetworkSpec net_;
  NeuronModel model_;
  EngineConfig config_;
  std::vector<CrossbarInstance> crossbars_;
  std::vector<std::size_t> crossbar_of_layer_;
};

struct NeuronCharacterization {
  int n_trials = 1000;
  int points = 13;
  double dt = 1e-12;
  double async_window = 2e-6;  // s, averaging window of the async output curve
  ScheduleSync schedule;
  ReadCircuitParams circuit;
  double reset_target = 0.9995;  // P->AP success rate the sync reset current must reach
  std::optional<double> reset_current;  // A; calibrated when unset
  unsigned workers = default_workers();
};

// Smallest reset magnitude on a 5 uA grid whose 0.5 ns pulse brings a thermalized P
// state to AP with at least `target` probability (2000 trials). Returns a negative current.
double calibrate_reset_current(const DeviceParams& params, const ScheduleSync& schedule, double target,
                               std::uint64_t seed, unsigned workers = default_workers(), double dt = 1e-12);

// Spike rate of free-running synchronous device neurons at each total write current
// (bias included), n_trials cycles per point, with the logistic fit.
SwitchingCharacteristic characterize_neuron_cycles(const NeuronModel& model, const NeuronCharacterization& opts,
                                                   std::span<const double> currents, std::uint64_t seed);

// sync:  calibrates the reset current, then fits the write curve under the neuron cycle
// async: fits the averaged inverter output and measures the zero-drive pulse width
NeuronModel characterize_neuron(const DeviceParams& params, OperatingMode mode,
                                const NeuronCharacterization& opts, std::uint64_t seed);

// Runs network inference for one image; see SnnSimulator::run.
InferenceTrace run_inference(const SnnSimulator& sim, std::span<const double> image, double total_time,
                             std::uint64_t seed);

struct EvaluationResult {
  std::vector<std::size_t> checkpoint_steps;
  std::vector<double> time_s;
  std::vector<double> accuracy;
  // Per-image means at each checkpoint.
  std::vector<double> neuron_j;
  std::vector<double> synapse_j;
  std::vector<double> toggles;
  std::size_t n_images = 0;
  std::size_t neurons = 0;
  OperatingMode mode = OperatingMode::synchronous;
  double timestep = 0.0;

  double final_accuracy() const { return accuracy.empty() ? 0.0 : accuracy.back(); }
};

// Geometric checkpoints 1, 2, 3, ... growing by ~15% per point, always ending at n_steps.
std::vector<std::size_t> geometric_checkpoints(std::size_t n_steps);

EvaluationResult evaluate(const SnnSimulator& sim, const Dataset& data, double total_time, std::uint64_t seed,
                          std::size_t n_images);

// Accuracy of the deterministic sigmoid forward pass on the first n_images.
double oracle_accuracy(const NetworkSpec& net, const Dataset& data, std::size_t n_images);

enum class SweepKind { synapse_sigma, supply_mv, cmos_sigma, temperature };

const char* to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& text);

struct SweepPoint {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> accuracies;
};

struct SweepRequest {
  SweepKind kind = SweepKind::synapse_sigma;
  std::vector<double> values;  // fraction, mV, sigma level or kelvin
  int n_mc = 50;
  std::size_t n_images = 100;
  double total_time = 100e-9;
  std::uint64_t seed = 0;
};

// Builds the neuron model at a temperature (re-characterization).
using ModelAtTemperature = std::function<NeuronModel(double kelvin)>;

// Accuracy at total_time, averaged over n_mc repetitions per sweep value. Repetition k
// uses the same programming and inference seeds for every value.
std::vector<SweepPoint> sweep_variations(const NetworkSpec& net, const NeuronModel& model,
                                         const EngineConfig& base, const Dataset& data,
                                         const SweepRequest& request,
                                         const ModelAtTemperature& recharacterize = {});

}  // namespace mtjsnn
