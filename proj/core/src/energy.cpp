#include "mtjsnn/energy.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"
#include "mtjsnn/csv.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/mtj_device.hpp"

namespace mtjsnn {

double neuron_energy(std::span<const double> currents, double hm_resistance, double duration) {
  if (!(hm_resistance > 0.0)) throw InvalidArgument("neuron_energy: HM resistance must be > 0");
  double s = 0.0;
  for (double i : currents) s += i * i;
  return s * hm_resistance * duration;
}

double read_path_resistance(const DeviceParams& p) { return 0.5 * (p.mgo_resistance_p + p.mgo_resistance_ap); }

double read_energy_sync(std::uint64_t n_cycles, std::size_t n_neurons, const ReadCircuitParams& circuit,
                        double r_mtj, const EnergyConstants& k) {
  const double per_read = k.sync_read_energy + circuit.read_current * circuit.read_current * r_mtj * circuit.read_time_sync;
  return static_cast<double>(n_cycles) * static_cast<double>(n_neurons) * per_read;
}

double read_energy_async(double elapsed, std::size_t n_neurons, double toggles, const ReadCircuitParams& circuit,
                         double r_mtj, const EnergyConstants& k) {
  const double power = k.async_static_power + circuit.read_current * circuit.read_current * r_mtj;
  return power * elapsed * static_cast<double>(n_neurons) + toggles * k.async_toggle_energy;
}

EnergyReport energy_at(const EvaluationResult& result, std::size_t k, const DeviceParams& device,
                       const ReadCircuitParams& circuit, const EnergyConstants& constants) {
  if (k >= result.accuracy.size()) throw InvalidArgument("energy_at: checkpoint out of range");
  EnergyReport r;
  r.mode = result.mode;
  r.device_delta = calibrate_barrier(device);
  r.time_to_target = result.time_s[k];
  r.accuracy = result.accuracy[k];
  r.neuron_j = result.neuron_j[k];
  r.synapse_j = result.synapse_j[k];
  const double r_mtj = read_path_resistance(device);
  r.read_j = result.mode == OperatingMode::synchronous
                 ? read_energy_sync(result.checkpoint_steps[k], result.neurons, circuit, r_mtj, constants)
                 : read_energy_async(result.time_s[k], result.neurons, result.toggles[k], circuit, r_mtj, constants);
  r.total_j = r.neuron_j + r.synapse_j + r.read_j;
  return r;
}

EnergyReport report(const EvaluationResult& result, const DeviceParams& device, const ReadCircuitParams& circuit,
                    double target_accuracy, const EnergyConstants& constants) {
  for (std::size_t k = 0; k < result.accuracy.size(); ++k) {
    if (result.accuracy[k] >= target_accuracy) {
      EnergyReport r = energy_at(result, k, device, circuit, constants);
      r.target_accuracy = target_accuracy;
      return r;
    }
  }
  const double best = result.accuracy.empty() ? 0.0 : *std::max_element(result.accuracy.begin(), result.accuracy.end());
  throw TargetUnreached("accuracy target " + fmt_g17(target_accuracy) + " not reached (best " + fmt_g17(best) + ")",
                        best);
}

void write_energy_json(std::ostream& out, const EnergyReport& r) {
  nlohmann::ordered_json j;
  j["delta_kbt"] = r.device_delta;
  j["mode"] = to_string(r.mode);
  j["neuron_j"] = r.neuron_j;
  j["synapse_j"] = r.synapse_j;
  j["read_j"] = r.read_j;
  j["total_j"] = r.total_j;
  j["time_to_target_s"] = r.time_to_target;
  j["target_accuracy"] = r.target_accuracy;
  j["accuracy"] = r.accuracy;
  out << j.dump(2) << '\n';
}

void write_energy_csv_header(std::ostream& out) { out << "delta_kbt,mode,neuron_j,synapse_j,read_j,total_j,time_ns\n"; }

void write_energy_csv_row(std::ostream& out, const EnergyReport& r) {
  out << fmt_g17(r.device_delta) << ',' << to_string(r.mode) << ',' << fmt_g17(r.neuron_j) << ','
      << fmt_g17(r.synapse_j) << ',' << fmt_g17(r.read_j) << ',' << fmt_g17(r.total_j) << ','
      << fmt_g17(r.time_to_target * 1e9) << '\n';
}

}  // namespace mtjsnn
