#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtjsnn/dataset.hpp"
#include "mtjsnn/energy.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/mtj_device.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/readout.hpp"
#include "mtjsnn/snn_engine.hpp"

namespace mtjsnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t name_key(const std::string& s) { return std::stoull(fnv1a_hex(s), nullptr, 16); }

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << std::setprecision(10);
  return out;
}

void write_csv(const fs::path& p, const RunConfig& c, const std::string& body) {
  auto out = open_out(p);
  out << "# config " << c.hash << '\n' << body;
}

void write_json(const fs::path& p, const RunConfig& c, json j) {
  j["config_hash"] = c.hash;
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

// Reads a stream written by write_csv, dropping '#' lines.
std::stringstream read_uncommented(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::stringstream ss;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    ss << line << '\n';
  }
  return ss;
}

json characteristic_json(const SwitchingCharacteristic& ch) {
  std::ostringstream s;
  write_characteristic_json(s, ch);
  return json::parse(s.str());
}

std::string characteristic_csv(const SwitchingCharacteristic& ch) {
  std::ostringstream s;
  s << std::setprecision(10);
  write_characteristic_csv(s, ch);
  return s.str();
}

NeuronCharacterization characterization(const RunConfig& c) {
  NeuronCharacterization o;
  o.n_trials = c.simulation.n_trials;
  o.points = c.simulation.points;
  o.dt = c.simulation.dt;
  o.async_window = c.simulation.async_window;
  o.circuit = c.readout;
  o.workers = c.workers;
  return o;
}

OperatingMode natural_mode(const DeviceParams& d) {
  return calibrate_barrier(d) < 5.0 ? OperatingMode::asynchronous : OperatingMode::synchronous;
}

std::string neuron_stem(const DeviceParams& d, OperatingMode mode) {
  return d.name + "_neuron_" + to_string(mode);
}

void save_neuron_model(const fs::path& dir, const RunConfig& c, const NeuronModel& m, OperatingMode mode) {
  const auto stem = neuron_stem(m.device, mode);
  write_csv(dir / (stem + ".csv"), c, characteristic_csv(m.characteristic));
  auto j = characteristic_json(m.characteristic);
  j["mode"] = to_string(mode);
  j["mean_pulse_width_s"] = m.pulse_width;
  j["reset_current_A"] = m.reset_current;
  write_json(dir / (stem + ".json"), c, j);
}

EngineConfig engine_config(const RunConfig& c, OperatingMode mode, Fidelity fidelity) {
  EngineConfig e;
  e.mode = mode;
  e.fidelity = fidelity;
  e.circuit = c.readout;
  e.dt = c.simulation.dt;
  e.g_o = c.network.g_o;
  e.workers = c.workers;
  return e;
}

struct NetworkInputs {
  NetworkSpec net;
  Dataset data;
};

NetworkInputs network_inputs(const RunConfig& c) {
  const auto& n = c.network;
  for (const auto* p : {&n.weights, &n.images}) {
    if (p->empty()) throw ConfigError("network.weights and network.images are required");
    if (!fs::exists(*p)) throw ConfigError("missing file " + p->string());
  }
  if (!n.labels.empty() && !fs::exists(n.labels)) throw ConfigError("missing file " + n.labels.string());
  return {load_network(n.weights), load_dataset(n.images, n.labels)};
}

double run_time(const RunConfig& c, OperatingMode mode) {
  return mode == OperatingMode::synchronous ? c.network.time_sync : c.network.time_async;
}

std::string accuracy_csv(const EvaluationResult& r) {
  std::ostringstream s;
  s << std::setprecision(10) << "time_ns,accuracy\n";
  for (std::size_t k = 0; k < r.accuracy.size(); ++k) s << r.time_s[k] * 1e9 << ',' << r.accuracy[k] << '\n';
  return s.str();
}

json report_json(const EnergyReport& r) {
  std::ostringstream s;
  write_energy_json(s, r);
  return json::parse(s.str());
}

struct Reported {
  EnergyReport report;
  bool reached = true;
};

Reported energy_of(const EvaluationResult& r, const DeviceParams& d, const RunConfig& c) {
  try {
    return {report(r, d, c.readout, c.network.target_accuracy, c.energy), true};
  } catch (const TargetUnreached& e) {
    std::cerr << "warning: " << e.what() << "; reporting energy at the end of the run\n";
    auto rep = energy_at(r, r.accuracy.size() - 1, d, c.readout, c.energy);
    rep.target_accuracy = c.network.target_accuracy;
    return {rep, false};
  }
}

}  // namespace

fs::path resolve_out_dir(const std::string& flag, const RunConfig& c) {
  if (!flag.empty()) return flag;
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("MTJSNN_OUT_DIR"); env && *env) return env;
  return fs::current_path();
}

NeuronModel neuron_model(const RunConfig& c, const DeviceParams& device, OperatingMode mode) {
  const auto& dir = c.network.characteristics;
  const auto stem = neuron_stem(device, mode);
  if (!dir.empty() && fs::exists(dir / (stem + ".json")) && fs::exists(dir / (stem + ".csv"))) {
    auto csv = read_uncommented(dir / (stem + ".csv"));
    std::ifstream js(dir / (stem + ".json"));
    NeuronModel m;
    m.device = device;
    m.characteristic = read_characteristic(csv, js);
    js.clear();
    js.seekg(0);
    const auto j = json::parse(js);
    if (j.value("mode", "") != to_string(mode)) throw ConfigError(stem + ".json: mode mismatch");
    m.pulse_width = j.at("mean_pulse_width_s").get<double>();
    m.reset_current = j.at("reset_current_A").get<double>();
    return m;
  }
  std::cerr << "characterizing " << stem << " (no stored model)\n";
  return characterize_neuron(device, mode, characterization(c), derive_seed(c.seed, {name_key(stem)}));
}

int cmd_characterize(const CommandContext& ctx) {
  const auto& c = ctx.config;
  if (c.devices.empty()) {
    std::cerr << "warning: empty device list, nothing to characterize\n";
    return 0;
  }
  for (const auto& d : c.devices) {
    WriteProtocol protocol;
    protocol.dt = c.simulation.dt;
    protocol.workers = c.workers;
    const auto seed = derive_seed(c.seed, {name_key(d.name)});
    auto grid = c.simulation.currents;
    if (grid.empty()) grid = auto_current_grid(d, c.simulation.pulse_width, derive_seed(seed, {1}), protocol, c.simulation.points);
    const auto ch = characterize_switching(d, c.simulation.pulse_width, grid, c.simulation.n_trials,
                                           derive_seed(seed, {2}), protocol);
    write_csv(ctx.out_dir / (d.name + "_switching.csv"), c, characteristic_csv(ch));
    auto j = characteristic_json(ch);
    j["device"] = d.name;
    write_json(ctx.out_dir / (d.name + "_switching.json"), c, j);
    std::cerr << d.name << ": i_bias " << ch.i_bias * 1e6 << " uA, i_o " << ch.i_o * 1e6 << " uA, residual "
              << ch.fit_residual << '\n';
    if (ctx.neuron_models) {
      const auto mode = natural_mode(d);
      const auto m = characterize_neuron(d, mode, characterization(c), derive_seed(seed, {3}));
      save_neuron_model(ctx.out_dir, c, m, mode);
    }
  }
  return 0;
}

int cmd_fit(const CommandContext& ctx) {
  if (ctx.fit_input.empty()) throw ConfigError("fit needs --input CSV (current_A,p_switch[,n_trials])");
  auto in = read_uncommented(ctx.fit_input);
  std::string line;
  std::getline(in, line);
  std::vector<double> i, p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    try {
      i.push_back(std::stod(a));
      p.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ConfigError(ctx.fit_input.string() + ": bad row '" + line + "'");
    }
  }
  const auto f = fit_sigmoid(i, p);
  json j{{"i_bias_A", f.i_bias}, {"i_o_A", f.i_o}, {"residual", f.residual}, {"iterations", f.iterations},
         {"input", ctx.fit_input.filename().string()}};
  write_json(ctx.out_dir / (ctx.fit_input.stem().string() + "_fit.json"), ctx.config, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_retention(const CommandContext& ctx) {
  const auto& c = ctx.config;
  std::ostringstream s;
  s << std::setprecision(10) << "label,delta_kbt,retention_time_s,failure_probability\n";
  const double t_ns = c.simulation.t_read * 1e9;
  auto row = [&](const std::string& label, double delta) {
    s << label << ',' << delta << ',' << retention_time(delta) << ','
      << retention_failure_probability(delta, t_ns) << '\n';
  };
  for (const auto& d : c.devices) row(d.name, calibrate_barrier(d));
  for (double delta : c.simulation.retention_deltas) row("delta", delta);
  write_csv(ctx.out_dir / "retention.csv", c, s.str());
  return 0;
}

int cmd_dwell(const CommandContext& ctx) {
  const auto& c = ctx.config;
  int done = 0;
  for (const auto& d : c.devices) {
    if (calibrate_barrier(d) >= 5.0) {
      std::cerr << "skipping " << d.name << ": not superparamagnetic\n";
      continue;
    }
    const auto seed = derive_seed(c.seed, {name_key(d.name)});
    json summary = json::array();
    std::ostringstream samples;
    samples << std::setprecision(10) << "bias_A,state,dwell_s\n";
    for (std::size_t b = 0; b < c.simulation.dwell_bias.size(); ++b) {
      const double bias = c.simulation.dwell_bias[b];
      DwellOptions o;
      o.dt = c.simulation.dt;
      const auto r = dwell_time_analysis(d, bias, c.simulation.dwell_duration, derive_seed(seed, {b}), o);
      for (double t : r.p_dwell_samples) samples << bias << ",P," << t << '\n';
      for (double t : r.ap_dwell_samples) samples << bias << ",AP," << t << '\n';
      summary.push_back({{"bias_A", bias},
                         {"barrier_kbt", r.barrier_height},
                         {"p_occupancy", r.p_occupancy},
                         {"transitions", r.transitions},
                         {"mean_dwell_s", r.mean_dwell()},
                         {"mean_p_dwell_s", r.mean_p_dwell()},
                         {"mean_ap_dwell_s", r.mean_ap_dwell()},
                         {"retention_time_s", r.retention_time}});
    }
    write_csv(ctx.out_dir / (d.name + "_dwell.csv"), c, samples.str());
    write_json(ctx.out_dir / (d.name + "_dwell.json"), c, json{{"device", d.name}, {"runs", summary}});

    if (c.simulation.read_stream_duration > 0) {
      SimConfig sim;
      sim.dt = c.simulation.dt;
      sim.duration = c.simulation.read_stream_duration;
      sim.seed = derive_seed(seed, {0xd1});
      sim.record_stride = 10;
      const auto traj = integrate(Vec3{1, 0, 0}, sim, d, [](double) { return 0.0; });
      std::ostringstream s;
      s << std::setprecision(10);
      write_read_stream_csv(s, read_async_stream(traj, c.readout));
      write_csv(ctx.out_dir / (d.name + "_read_stream.csv"), c, s.str());
    }
    ++done;
  }
  if (done == 0) std::cerr << "warning: no superparamagnetic device in the config\n";
  return 0;
}

int cmd_simulate(const CommandContext& ctx) {
  const auto& c = ctx.config;
  const auto mode = c.network.mode;
  const double total = ctx.total_time.value_or(run_time(c, mode));
  if (!(total > 0)) throw InvalidArgument("simulation time must be positive");
  const auto& d = c.device(c.network.device);
  auto in = network_inputs(c);
  const auto model = neuron_model(c, d, mode);
  const SnnSimulator sim(in.net, model, engine_config(c, mode, c.network.fidelity), derive_seed(c.seed, {1}));
  const auto n = std::min(c.network.n_images, in.data.size());
  const auto r = evaluate(sim, in.data, total, derive_seed(c.seed, {2}), n);
  const auto oracle = oracle_accuracy(in.net, in.data, n);

  const auto stem = d.name + "_" + to_string(mode);
  write_csv(ctx.out_dir / (stem + "_accuracy.csv"), c, accuracy_csv(r));
  const auto e = energy_of(r, d, c);
  auto ej = report_json(e.report);
  ej["target_reached"] = e.reached;
  write_json(ctx.out_dir / (stem + "_energy.json"), c, ej);
  write_json(ctx.out_dir / (stem + "_summary.json"), c,
             json{{"device", d.name},
                  {"mode", to_string(mode)},
                  {"fidelity", to_string(c.network.fidelity)},
                  {"n_images", r.n_images},
                  {"neurons", r.neurons},
                  {"timestep_s", r.timestep},
                  {"total_time_s", total},
                  {"final_accuracy", r.final_accuracy()},
                  {"oracle_accuracy", oracle},
                  {"i_bias_A", model.characteristic.i_bias},
                  {"i_o_A", model.characteristic.i_o}});
  std::cerr << stem << ": accuracy " << r.final_accuracy() << " (oracle " << oracle << ")\n";
  return 0;
}

int cmd_sweep(const CommandContext& ctx) {
  const auto& c = ctx.config;
  if (!c.sweep) throw ConfigError("config has no 'sweep' section");
  const auto& w = *c.sweep;
  const auto mode = c.network.mode;
  const auto& d = c.device(c.network.device);
  auto in = network_inputs(c);
  const auto model = neuron_model(c, d, mode);
  SweepRequest req;
  req.kind = w.kind;
  req.values = w.values;
  req.n_mc = w.n_mc;
  req.n_images = std::min(w.n_images.value_or(c.network.n_images), in.data.size());
  req.total_time = run_time(c, mode);
  req.seed = c.seed;
  ModelAtTemperature recharacterize = [&](double kelvin) {
    auto hot = d;
    hot.temperature = kelvin;
    return characterize_neuron(hot, mode, characterization(c),
                               derive_seed(c.seed, {name_key(d.name), static_cast<std::uint64_t>(kelvin * 1000)}));
  };
  const auto points = sweep_variations(in.net, model, engine_config(c, mode, Fidelity::behavioral), in.data, req,
                                       recharacterize);
  std::ostringstream s;
  s << std::setprecision(10) << "sweep_value,mean_accuracy,std_accuracy\n";
  for (const auto& p : points) s << p.value << ',' << p.mean_accuracy << ',' << p.std_accuracy << '\n';
  write_csv(ctx.out_dir / (std::string("sweep_") + to_string(w.kind) + "_" + to_string(mode) + ".csv"), c, s.str());
  return 0;
}

int cmd_energy_report(const CommandContext& ctx) {
  const auto& c = ctx.config;
  auto in = network_inputs(c);
  const auto n = std::min(c.network.n_images, in.data.size());
  std::ostringstream csv;
  csv << std::setprecision(10);
  write_energy_csv_header(csv);
  json all = json::array();
  for (std::size_t k = 0; k < c.energy_runs.size(); ++k) {
    const auto& run = c.energy_runs[k];
    const auto& d = c.device(run.device);
    const auto model = neuron_model(c, d, run.mode);
    const SnnSimulator sim(in.net, model, engine_config(c, run.mode, c.network.fidelity), derive_seed(c.seed, {1}));
    const auto r = evaluate(sim, in.data, run_time(c, run.mode), derive_seed(c.seed, {2}), n);
    const auto e = energy_of(r, d, c);
    write_energy_csv_row(csv, e.report);
    auto j = report_json(e.report);
    j["device"] = d.name;
    j["target_reached"] = e.reached;
    all.push_back(j);
    std::cerr << d.name << ' ' << to_string(run.mode) << ": total " << e.report.total_j * 1e9 << " nJ\n";
  }
  write_csv(ctx.out_dir / "energy.csv", c, csv.str());
  write_json(ctx.out_dir / "energy.json", c, json{{"runs", all}});
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Stochastic MTJ spiking-network simulator"};
  app.require_subcommand(1);
  std::string config_path, out, mode, fidelity, input;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<double> time_ns;
  bool neuron_models = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  app.add_option("--out", out, "output directory (default $MTJSNN_OUT_DIR)");
  app.add_option("--fidelity", fidelity, "device or behavioral")->check(CLI::IsMember({"device", "behavioral"}));
  app.add_option("--mode", mode, "sync or async")->check(CLI::IsMember({"sync", "async"}));
  app.fallthrough();

  std::map<CLI::App*, int (*)(const CommandContext&)> handlers;
  auto* ch = app.add_subcommand("characterize", "switching curves per device");
  ch->add_flag("--neuron-models", neuron_models, "also fit neuron-mode curves");
  handlers[ch] = cmd_characterize;
  auto* fit = app.add_subcommand("fit", "logistic fit of a switching CSV");
  fit->add_option("--input", input, "CSV with current_A,p_switch columns")->required();
  handlers[fit] = cmd_fit;
  handlers[app.add_subcommand("retention", "retention time and read failure per barrier")] = cmd_retention;
  handlers[app.add_subcommand("dwell", "telegraphic dwell statistics")] = cmd_dwell;
  auto* sim = app.add_subcommand("simulate", "network inference accuracy and energy");
  sim->add_option("--time", time_ns, "total inference time in ns");
  handlers[sim] = cmd_simulate;
  handlers[app.add_subcommand("sweep", "accuracy under variations")] = cmd_sweep;
  handlers[app.add_subcommand("energy-report", "energy per classification")] = cmd_energy_report;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Overrides o;
    o.seed = seed;
    o.workers = workers;
    if (!mode.empty()) o.mode = mode;
    if (!fidelity.empty()) o.fidelity = fidelity;
    CommandContext ctx;
    ctx.config = config_path.empty() ? parse_config("{}", fs::current_path(), o) : load_config(config_path, o);
    if (ctx.config.workers == 0) ctx.config.workers = default_workers();
    ctx.out_dir = resolve_out_dir(out, ctx.config);
    if (time_ns) ctx.total_time = *time_ns * 1e-9;
    ctx.fit_input = input;
    ctx.neuron_models = neuron_models;
    for (auto* sub : app.get_subcommands()) return handlers.at(sub)(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace mtjsnn::cli
