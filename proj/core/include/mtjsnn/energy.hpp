#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "mtjsnn/device_params.hpp"
#include "mtjsnn/readout.hpp"
#include "mtjsnn/snn_engine.hpp"

namespace mtjsnn {

// Read-circuit calibration constants. Sync: 10 read cycles over 4234 neurons give ~2.1 nJ.
// Async: a ~90 ns window over 4234 neurons gives ~3.3 nJ.
struct EnergyConstants {
  double sync_read_energy = 50e-15;    // J per neuron per read cycle (inverters + latch)
  double async_static_power = 8.5e-6;  // W per neuron, inverters always on
  double async_toggle_energy = 5e-15;  // J per output transition
};

struct EnergyReport {
  double neuron_j = 0.0;
  double synapse_j = 0.0;
  double read_j = 0.0;
  double total_j = 0.0;
  OperatingMode mode = OperatingMode::synchronous;
  double device_delta = 0.0;    // kBT
  double time_to_target = 0.0;  // s
  double target_accuracy = 0.0;
  double accuracy = 0.0;        // reached at time_to_target
};

// sum I^2 R duration over the samples.
double neuron_energy(std::span<const double> currents, double hm_resistance, double duration);

// Mean MTJ resistance seen by the read current.
double read_path_resistance(const DeviceParams& params);

// sync: n_cycles * n_neurons * (per-read constant + I_read^2 R t_read)
double read_energy_sync(std::uint64_t n_cycles, std::size_t n_neurons, const ReadCircuitParams& circuit,
                        double r_mtj, const EnergyConstants& k = {});
// async: (static power + I_read^2 R) * elapsed * n_neurons + toggles * per-toggle energy
double read_energy_async(double elapsed, std::size_t n_neurons, double toggles, const ReadCircuitParams& circuit,
                         double r_mtj, const EnergyConstants& k = {});

// Energy of the run up to checkpoint k.
EnergyReport energy_at(const EvaluationResult& result, std::size_t k, const DeviceParams& device,
                       const ReadCircuitParams& circuit, const EnergyConstants& constants = {});

// Energy up to the first checkpoint whose accuracy reaches target. Throws
// TargetUnreached carrying the best accuracy otherwise.
EnergyReport report(const EvaluationResult& result, const DeviceParams& device, const ReadCircuitParams& circuit,
                    double target_accuracy = 0.96, const EnergyConstants& constants = {});

void write_energy_json(std::ostream& out, const EnergyReport& r);
// delta_kbt,mode,neuron_j,synapse_j,read_j,total_j,time_ns
void write_energy_csv_header(std::ostream& out);
void write_energy_csv_row(std::ostream& out, const EnergyReport& r);

}  // namespace mtjsnn
