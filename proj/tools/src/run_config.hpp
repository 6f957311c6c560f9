#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtjsnn/device_params.hpp"
#include "mtjsnn/energy.hpp"
#include "mtjsnn/readout.hpp"
#include "mtjsnn/snn_engine.hpp"

namespace mtjsnn::cli {

// Config file problems; reported with exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationSettings {
  double dt = 1e-12;
  double pulse_width = 0.5e-9;
  int n_trials = 1000;
  int points = 13;
  std::vector<double> currents;  // A; empty selects an automatic grid
  double async_window = 2e-6;
  double dwell_duration = 10e-6;
  std::vector<double> dwell_bias{0.0};
  double read_stream_duration = 200e-9;
  double t_read = 1e-9;
  std::vector<double> retention_deltas;
  bool neuron = true;  // characterize also writes the neuron model curve
};

struct NetworkSettings {
  std::filesystem::path weights;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::filesystem::path characteristics;  // directory with <device>_neuron_<mode> files
  std::size_t n_images = 500;
  double time_sync = 120e-9;
  double time_async = 400e-9;
  std::string device = "10kBT";
  OperatingMode mode = OperatingMode::synchronous;
  Fidelity fidelity = Fidelity::behavioral;
  double g_o = 5e-6;
  double target_accuracy = 0.96;
};

struct SweepSettings {
  SweepKind kind = SweepKind::synapse_sigma;
  std::vector<double> values;
  int n_mc = 50;
  std::optional<std::size_t> n_images;
};

struct EnergyRun {
  std::string device;
  OperatingMode mode = OperatingMode::synchronous;
};

struct RunConfig {
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::filesystem::path output_dir;
  std::vector<DeviceParams> devices;
  SimulationSettings simulation;
  ReadCircuitParams readout;
  EnergyConstants energy;
  NetworkSettings network;
  std::optional<SweepSettings> sweep;
  std::vector<EnergyRun> energy_runs;
  std::string hash;  // FNV-1a of the canonical effective document

  const DeviceParams& device(const std::string& name) const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> mode;
  std::optional<std::string> fidelity;
};

// Parses and validates a JSON config. Unknown keys, wrong types and out-of-range values
// throw ConfigError. Relative paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const Overrides& o = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& o = {});

std::string fnv1a_hex(const std::string& text);

}  // namespace mtjsnn::cli
