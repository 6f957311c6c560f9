#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace mtjsnn::cli {

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  std::optional<double> total_time;     // s, simulate only
  std::filesystem::path fit_input;      // fit only
  bool neuron_models = false;           // characterize: also fit neuron curves
};

// Output directory precedence: --out, config output_dir, $MTJSNN_OUT_DIR, cwd.
std::filesystem::path resolve_out_dir(const std::string& flag, const RunConfig& c);

int cmd_characterize(const CommandContext& ctx);
int cmd_fit(const CommandContext& ctx);
int cmd_retention(const CommandContext& ctx);
int cmd_dwell(const CommandContext& ctx);
int cmd_simulate(const CommandContext& ctx);
int cmd_sweep(const CommandContext& ctx);
int cmd_energy_report(const CommandContext& ctx);

// Loads <dir>/<device>_neuron_<mode>.{csv,json} when present, otherwise characterizes.
NeuronModel neuron_model(const RunConfig& c, const DeviceParams& device, OperatingMode mode);

// Runs a subcommand from argv; returns the process exit code.
int run(int argc, char** argv);

}  // namespace mtjsnn::cli
