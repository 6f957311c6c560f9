#include "mtjsnn/snn_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mtjsnn/errors.hpp"
#include "mtjsnn/parallel.hpp"

namespace mtjsnn {

const char* to_string(Fidelity f) { return f == Fidelity::device ? "device" : "behavioral"; }

Fidelity parse_fidelity(const std::string& text) {
  if (text == "device") return Fidelity::device;
  if (text == "behavioral") return Fidelity::behavioral;
  throw InvalidArgument("unknown fidelity '" + text + "' (expected device or behavioral)");
}

double neuron_bias(const SwitchingCharacteristic& c, OperatingMode mode) {
  return mode == OperatingMode::synchronous ? c.i_bias : 0.0;
}

double spike_probability(double drive, const SwitchingCharacteristic& c, double bias) {
  return sigmoid((drive + bias - c.i_bias) / c.i_o);
}

bool neuron_step_behavioral(double drive, const SwitchingCharacteristic& c, double bias, Rng& rng) {
  return uniform01(rng) < spike_probability(drive, c, bias);
}

WriteProtocol neuron_write_protocol(const ScheduleSync& schedule, double reset_current, double dt) {
  WriteProtocol p;
  p.dt = dt;
  p.pre_pulse = PrePulse{reset_current, schedule.reset};
  p.settle = schedule.rest;
  return p;
}

namespace {
SimConfig stepper_config(double dt) {
  SimConfig c;
  c.dt = dt;
  return c;
}
std::size_t window_steps(double duration, double dt) { return static_cast<std::size_t>(duration / dt + 0.5); }
}  // namespace

DeviceNeuron::DeviceNeuron(const NeuronModel& model, const EngineConfig& config, Rng rng)
    : model_(&model),
      config_(config),
      stepper_(model.device, stepper_config(config.dt)),
      rng_(std::move(rng)),
      m_{-1.0, 0.0, 0.0},
      reader_(config.circuit, config.dt, false),
      bias_(neuron_bias(model.characteristic, config.mode)) {
  m_ = advance(0.0, 5e-9);
  if (config_.mode == OperatingMode::synchronous) {
    m_.x = -std::abs(m_.x);
    m_ = advance(model.reset_current, config_.schedule.reset);
  } else {
    reader_ = AsyncReader(config.circuit, config.dt, m_.x > 0.0);
  }
}

Vec3 DeviceNeuron::advance(double current, double duration) {
  Vec3 m = m_;
  for (std::size_t i = window_steps(duration, config_.dt); i > 0; --i) m = stepper_.step(m, current, rng_, steps_++);
  return m;
}

int DeviceNeuron::step(double drive) {
  if (config_.mode == OperatingMode::synchronous) {
    const auto& s = config_.schedule;
    m_ = advance(drive + bias_, s.write);
    m_ = advance(0.0, s.rest);
    const int level = read_sync(m_, config_.circuit, calibrate_barrier(model_->device), rng_);
    m_ = advance(0.0, s.read);
    m_ = advance(model_->reset_current, s.reset);
    reset_ok_ = m_.x < 0.0;
    return level;
  }
  const double current = apply_read_backaction(drive, config_.circuit, OperatingMode::asynchronous);
  for (std::size_t i = window_steps(config_.async_tick, config_.dt); i > 0; --i) {
    m_ = stepper_.step(m_, current, rng_, steps_++);
    reader_.update(m_.x);
  }
  return reader_.level();
}

int neuron_step_device(double drive, DeviceNeuron& neuron) { return neuron.step(drive); }

SnnSimulator::SnnSimulator(NetworkSpec net, NeuronModel model, EngineConfig config, std::uint64_t program_seed)
    : net_(std::move(net)), model_(std::move(model)), config_(config) {
  validate(model_.device);
  validate(config_.circuit);
  if (!(model_.characteristic.i_o > 0.0)) throw InvalidArgument("neuron characteristic has no fitted i_o");
  if (config_.mode == OperatingMode::asynchronous && !(model_.pulse_width > 0.0)) {
    throw InvalidArgument("async neuron model needs a positive pulse width");
  }
  crossbar_of_layer_.assign(net_.layers.size(), static_cast<std::size_t>(-1));
  for (std::size_t li = 0; li < net_.layers.size(); ++li) {
    if (!net_.layers[li].has_neurons()) continue;
    crossbar_of_layer_[li] = crossbars_.size();
    auto cb = program(unrolled_weights(net_, li), config_.g_o, config_.synapse_sigma,
                      derive_seed(program_seed, {li}), config_.g_off);
    configure_supply(cb, model_.characteristic.i_o);
    crossbars_.push_back(std::move(cb));
  }
}

namespace {

struct StepEnergy {
  double neuron = 0.0;
  double synapse = 0.0;
  std::uint64_t toggles = 0;
};

}  // namespace

// Runs n_steps of the network. sink(step, layer_outputs, energy) sees the outputs of
// every layer after each step.
template <class Sink>
void SnnSimulator::simulate(std::span<const double> image, std::size_t n_steps, Rng& rng, Sink&& sink) const {
  if (image.size() != net_.input.size()) throw InvalidArgument("image size does not match network input");
  for (double px : image) {
    if (!(px >= 0.0 && px <= 1.0)) throw InvalidArgument("image pixels must be in [0, 1]");
  }
  const bool sync = config_.mode == OperatingMode::synchronous;
  const auto& c = model_.characteristic;
  const double bias = neuron_bias(c, config_.mode);
  const double flip = sync ? retention_failure_probability(calibrate_barrier(model_.device),
                                                           config_.circuit.read_time_sync * 1e9)
                           : 0.0;
  const double rho = sync ? 0.0 : std::exp(-config_.async_tick / (0.5 * model_.pulse_width));
  const double r_hm = model_.device.hm_resistance();
  const double window = sync ? config_.schedule.write : config_.async_tick;
  const double v = crossbars_.empty() ? 0.0 : crossbars_.front().delta_v + config_.supply_noise;

  const std::size_t L = net_.layers.size();
  std::vector<std::vector<double>> prev(L), cur(L);
  for (std::size_t li = 0; li < L; ++li) {
    prev[li].assign(net_.layers[li].out.size(), 0.0);
    cur[li].assign(net_.layers[li].out.size(), 0.0);
  }
  std::vector<double> input(image.size());
  std::vector<double> act;
  std::vector<double> current;

  std::vector<std::vector<DeviceNeuron>> devices;
  if (config_.fidelity == Fidelity::device) {
    devices.resize(L);
    const std::uint64_t base = rng();
    for (std::size_t li = 0; li < L; ++li) {
      if (!net_.layers[li].has_neurons()) continue;
      devices[li].reserve(net_.layers[li].out.size());
      for (std::size_t n = 0; n < net_.layers[li].out.size(); ++n) {
        devices[li].emplace_back(model_, config_, make_stream(base, {li, n}));
      }
    }
  }

  for (std::size_t step = 0; step < n_steps; ++step) {
    StepEnergy e;
    for (std::size_t k = 0; k < image.size(); ++k) input[k] = uniform01(rng) < image[k] ? 1.0 : 0.0;
    for (std::size_t li = 0; li < L; ++li) {
      const Layer& layer = net_.layers[li];
      if (!layer.has_neurons()) {
        subsample(layer, cur[li - 1], cur[li]);
        continue;
      }
      const auto& src = li == 0 ? input : prev[li - 1];
      act.assign(src.begin(), src.end());
      act.push_back(1.0);
      const auto& cb = crossbars_[crossbar_of_layer_[li]];
      current.resize(cb.neurons);
      column_currents(cb, act, config_.supply_noise, current);
      double g = 0.0;
      for (std::size_t m = 0; m < act.size(); ++m) g += act[m] * cb.row_conductance[m];
      e.synapse += v * v * g * window;

      auto& out = cur[li];
      for (std::size_t n = 0; n < out.size(); ++n) {
        const double i_n = current[n];
        e.neuron += (i_n + bias) * (i_n + bias) * r_hm * window;
        double s;
        if (config_.fidelity == Fidelity::device) {
          s = devices[li][n].step(i_n);
        } else if (sync) {
          double p = spike_probability(i_n, c, bias);
          p = p * (1.0 - flip) + (1.0 - p) * flip;
          s = uniform01(rng) < p ? 1.0 : 0.0;
        } else {
          const double p = apply_cmos_variation(spike_probability(i_n, c, bias), config_.circuit);
          const double q = p + (prev[li][n] - p) * rho;
          s = uniform01(rng) < q ? 1.0 : 0.0;
        }
        if (s != prev[li][n]) ++e.toggles;
        out[n] = s;
      }
      if (sync) e.neuron += static_cast<double>(out.size()) * model_.reset_current * model_.reset_current * r_hm *
                            config_.schedule.reset;
    }
    sink(step, cur, e);
    std::swap(prev, cur);
  }
}

InferenceTrace SnnSimulator::run(std::span<const double> image, double total_time, std::uint64_t seed,
                                 std::uint64_t image_index) const {
  const double dt = config_.timestep();
  if (!(total_time >= dt)) throw InvalidArgument("total time is shorter than one timestep");
  const auto n_steps = static_cast<std::size_t>(total_time / dt + 1e-9);
  InferenceTrace trace;
  trace.timestep_duration = dt;
  trace.counts.reserve(n_steps);
  std::vector<std::uint32_t> counts(net_.output_count(), 0);
  double neuron = 0.0, synapse = 0.0;
  std::uint64_t toggles = 0;
  Rng rng = make_stream(seed, {image_index});
  simulate(image, n_steps, rng, [&](std::size_t, const std::vector<std::vector<double>>& out, const StepEnergy& e) {
    const auto& last = out.back();
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += last[k] > 0.5 ? 1 : 0;
    neuron += e.neuron;
    synapse += e.synapse;
    toggles += e.toggles;
    trace.counts.push_back(counts);
    trace.predicted.push_back(static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin()));
    trace.neuron_j.push_back(neuron);
    trace.synapse_j.push_back(synapse);
    trace.toggles.push_back(toggles);
  });
  return trace;
}

std::vector<std::vector<double>> SnnSimulator::empirical_rates(std::span<const double> image, std::size_t n_steps,
                                                               std::uint64_t seed) const {
  if (n_steps == 0) throw InvalidArgument("empirical_rates: n_steps must be > 0");
  std::vector<std::vector<double>> sums;
  for (const auto& l : net_.layers) sums.emplace_back(l.out.size(), 0.0);
  Rng rng = make_stream(seed, {0});
  simulate(image, n_steps, rng, [&](std::size_t, const std::vector<std::vector<double>>& out, const StepEnergy&) {
    for (std::size_t li = 0; li < out.size(); ++li) {
      for (std::size_t n = 0; n < out[li].size(); ++n) sums[li][n] += out[li][n];
    }
  });
  for (auto& layer : sums) {
    for (double& s : layer) s /= static_cast<double>(n_steps);
  }
  return sums;
}

std::vector<std::vector<double>> SnnSimulator::expected_rates(std::span<const double> image) const {
  if (image.size() != net_.input.size()) throw InvalidArgument("image size does not match network input");
  const bool sync = config_.mode == OperatingMode::synchronous;
  const auto& c = model_.characteristic;
  const double bias = neuron_bias(c, config_.mode);
  const double flip = sync ? retention_failure_probability(calibrate_barrier(model_.device),
                                                           config_.circuit.read_time_sync * 1e9)
                           : 0.0;
  std::vector<std::vector<double>> out;
  std::vector<double> src(image.begin(), image.end());
  for (std::size_t li = 0; li < net_.layers.size(); ++li) {
    const Layer& layer = net_.layers[li];
    std::vector<double> a(layer.out.size());
    if (!layer.has_neurons()) {
      subsample(layer, src, a);
    } else {
      std::vector<double> act = src;
      act.push_back(1.0);
      const auto current = column_currents(crossbars_[crossbar_of_layer_[li]], act, config_.supply_noise);
      for (std::size_t n = 0; n < a.size(); ++n) {
        double p = spike_probability(current[n], c, bias);
        a[n] = sync ? p * (1.0 - flip) + (1.0 - p) * flip : apply_cmos_variation(p, config_.circuit);
      }
    }
    src = a;
    out.push_back(std::move(a));
  }
  return out;
}

InferenceTrace run_inference(const SnnSimulator& sim, std::span<const double> image, double total_time,
                             std::uint64_t seed) {
  return sim.run(image, total_time, seed, 0);
}

std::vector<std::size_t> geometric_checkpoints(std::size_t n_steps) {
  std::vector<std::size_t> out;
  for (std::size_t s = 1; s < n_steps; s = std::max(s + 1, static_cast<std::size_t>(std::lround(s * 1.15)))) {
    out.push_back(s);
  }
  if (n_steps > 0) out.push_back(n_steps);
  return out;
}

EvaluationResult evaluate(const SnnSimulator& sim, const Dataset& data, double total_time, std::uint64_t seed,
                          std::size_t n_images) {
  n_images = std::min(n_images, data.size());
  if (n_images == 0) throw InvalidArgument("evaluate: empty dataset");
  const double dt = sim.config().timestep();
  if (!(total_time >= dt)) throw InvalidArgument("total time is shorter than one timestep");
  EvaluationResult r;
  r.checkpoint_steps = geometric_checkpoints(static_cast<std::size_t>(total_time / dt + 1e-9));
  r.n_images = n_images;
  r.neurons = sim.network().neuron_count();
  r.mode = sim.config().mode;
  r.timestep = dt;
  const std::size_t K = r.checkpoint_steps.size();
  std::vector<double> correct(n_images * K), neuron(n_images * K), synapse(n_images * K), toggles(n_images * K);
  parallel_for(n_images, sim.config().workers, [&](std::size_t i) {
    const auto trace = sim.run(data.image(i), total_time, seed, i);
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t s = r.checkpoint_steps[k] - 1;
      correct[i * K + k] = trace.predicted[s] == data.labels[i] ? 1.0 : 0.0;
      neuron[i * K + k] = trace.neuron_j[s];
      synapse[i * K + k] = trace.synapse_j[s];
      toggles[i * K + k] = static_cast<double>(trace.toggles[s]);
    }
  });
  auto mean_at = [&](const std::vector<double>& v, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_images; ++i) s += v[i * K + k];
    return s / static_cast<double>(n_images);
  };
  for (std::size_t k = 0; k < K; ++k) {
    r.time_s.push_back(static_cast<double>(r.checkpoint_steps[k]) * dt);
    r.accuracy.push_back(mean_at(correct, k));
    r.neuron_j.push_back(mean_at(neuron, k));
    r.synapse_j.push_back(mean_at(synapse, k));
    r.toggles.push_back(mean_at(toggles, k));
  }
  return r;
}

double oracle_accuracy(const NetworkSpec& net, const Dataset& data, std::size_t n_images) {
  n_images = std::min(n_images, data.size());
  if (n_images == 0) throw InvalidArgument("oracle_accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_images; ++i) {
    const auto acts = rate_forward(net, data.image(i));
    if (argmax(acts.back()) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_images);
}

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::synapse_sigma: return "synapse_sigma";
    case SweepKind::supply_mv: return "supply_mv";
    case SweepKind::cmos_sigma: return "cmos_sigma";
    case SweepKind::temperature: return "temperature";
  }
  return "?";
}

SweepKind parse_sweep_kind(const std::string& text) {
  for (auto k : {SweepKind::synapse_sigma, SweepKind::supply_mv, SweepKind::cmos_sigma, SweepKind::temperature}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown sweep kind '" + text + "'");
}

std::vector<SweepPoint> sweep_variations(const NetworkSpec& net, const NeuronModel& model, const EngineConfig& base,
                                         const Dataset& data, const SweepRequest& request,
                                         const ModelAtTemperature& recharacterize) {
  if (request.n_mc < 1) throw InvalidArgument("sweep: n_mc must be >= 1");
  if (request.kind == SweepKind::temperature && !recharacterize) {
    throw InvalidArgument("sweep: temperature sweeps need a re-characterization callback");
  }
  std::vector<SweepPoint> out;
  for (double value : request.values) {
    NeuronModel m = request.kind == SweepKind::temperature ? recharacterize(value) : model;
    SweepPoint point;
    point.value = value;
    for (int k = 0; k < request.n_mc; ++k) {
      const auto rep = static_cast<std::uint64_t>(k);
      EngineConfig cfg = base;
      switch (request.kind) {
        case SweepKind::synapse_sigma: cfg.synapse_sigma = value; break;
        case SweepKind::supply_mv: {
          Rng rng = make_stream(request.seed, {rep, 2});
          cfg.supply_noise = std::normal_distribution<double>(0.0, 1.0)(rng) * value * 1e-3;
          break;
        }
        case SweepKind::cmos_sigma: cfg.circuit.sigma_level = static_cast<int>(std::lround(value)); break;
        case SweepKind::temperature: break;
      }
      const SnnSimulator sim(net, m, cfg, derive_seed(request.seed, {rep, 1}));
      const auto r = evaluate(sim, data, request.total_time, derive_seed(request.seed, {rep, 3}), request.n_images);
      point.accuracies.push_back(r.final_accuracy());
    }
    const double n = static_cast<double>(point.accuracies.size());
    point.mean_accuracy = std::accumulate(point.accuracies.begin(), point.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : point.accuracies) ss += (a - point.mean_accuracy) * (a - point.mean_accuracy);
    point.std_accuracy = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace mtjsnn

namespace mtjsnn {

double calibrate_reset_current(const DeviceParams& params, const ScheduleSync& schedule, double target,
                               std::uint64_t seed, unsigned workers, double dt) {
  constexpr int kTrials = 2000;
  const LlgsStepper stepper(params, stepper_config(dt));
  const std::size_t warm = window_steps(2e-9, dt), pulse = window_steps(schedule.reset, dt);
  for (int k = 1; k <= 40; ++k) {
    const double current = -5e-6 * k;
    std::vector<unsigned char> ok(kTrials, 0);
    parallel_for(ok.size(), workers, [&](std::size_t t) {
      Rng rng = make_stream(seed, {static_cast<std::uint64_t>(k), t});
      Vec3 m = stepper.run({1.0, 0.0, 0.0}, 0.0, warm, rng);
      m.x = std::abs(m.x);
      m = stepper.run(m, current, pulse, rng, warm);
      ok[t] = m.x < 0.0 ? 1 : 0;
    });
    const double rate = std::accumulate(ok.begin(), ok.end(), 0.0) / kTrials;
    if (rate >= target) return current;
  }
  throw InsufficientRange("calibrate_reset_current: no reset current up to 200 uA reaches the target");
}

namespace {

// Symmetric current span whose averaged output runs from below 0.05 to above 0.95.
double async_span(const DeviceParams& params, const ReadCircuitParams& circuit, std::uint64_t seed, double dt) {
  StreamOptions o;
  o.dt = dt;
  for (double a = 0.25e-6; a < 1e-3; a *= 1.5) {
    o.trajectory_index = 0;
    const double hi = simulate_read_stream(params, a, circuit, 0.5e-6, seed, o).mean_output;
    o.trajectory_index = 1;
    const double lo = simulate_read_stream(params, -a, circuit, 0.5e-6, seed, o).mean_output;
    if (hi > 0.95 && lo < 0.05) return a;
  }
  throw InsufficientRange("async characterization: output never saturates");
}

}  // namespace

SwitchingCharacteristic characterize_neuron_cycles(const NeuronModel& model, const NeuronCharacterization& opts,
                                                   std::span<const double> currents, std::uint64_t seed) {
  if (opts.n_trials < 100) throw InvalidArgument("characterize_neuron_cycles: n_trials must be >= 100");
  constexpr std::size_t kNeurons = 10;
  EngineConfig cfg;
  cfg.mode = OperatingMode::synchronous;
  cfg.schedule = opts.schedule;
  cfg.circuit = opts.circuit;
  cfg.dt = opts.dt;
  NeuronModel unbiased = model;
  unbiased.characteristic.i_bias = 0.0;
  const std::size_t cycles = (static_cast<std::size_t>(opts.n_trials) + kNeurons - 1) / kNeurons;
  std::vector<double> spikes(currents.size() * kNeurons, 0.0);
  parallel_for(spikes.size(), opts.workers, [&](std::size_t k) {
    DeviceNeuron neuron(unbiased, cfg, make_stream(seed, {k / kNeurons, k % kNeurons}));
    for (std::size_t c = 0; c < cycles; ++c) spikes[k] += neuron.step(currents[k / kNeurons]);
  });
  SwitchingCharacteristic out;
  out.currents.assign(currents.begin(), currents.end());
  out.n_trials = static_cast<int>(cycles * kNeurons);
  out.pulse_width = opts.schedule.write;
  for (std::size_t i = 0; i < currents.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < kNeurons; ++j) s += spikes[i * kNeurons + j];
    out.p_switch.push_back(s / static_cast<double>(out.n_trials));
  }
  const SigmoidFit fit = fit_sigmoid(out.currents, out.p_switch);
  out.i_bias = fit.i_bias;
  out.i_o = fit.i_o;
  out.fit_residual = fit.residual;
  out.delta_kbt = calibrate_barrier(model.device);
  return out;
}

NeuronModel characterize_neuron(const DeviceParams& params, OperatingMode mode, const NeuronCharacterization& opts,
                                std::uint64_t seed) {
  NeuronModel model;
  model.device = params;
  if (mode == OperatingMode::synchronous) {
    model.reset_current = opts.reset_current.value_or(
        calibrate_reset_current(params, opts.schedule, opts.reset_target, derive_seed(seed, {1}), opts.workers, opts.dt));
    WriteProtocol protocol = neuron_write_protocol(opts.schedule, model.reset_current, opts.dt);
    protocol.workers = opts.workers;
    const auto grid = auto_current_grid(params, opts.schedule.write, derive_seed(seed, {2}), protocol, opts.points);
    model.characteristic = characterize_neuron_cycles(model, opts, grid, derive_seed(seed, {3}));
    return model;
  }
  const double a = async_span(params, opts.circuit, derive_seed(seed, {4}), opts.dt);
  std::vector<double> grid(static_cast<std::size_t>(opts.points));
  for (int i = 0; i < opts.points; ++i) grid[static_cast<std::size_t>(i)] = -a + 2.0 * a * i / (opts.points - 1);
  model.characteristic =
      characterize_async(params, opts.circuit, grid, opts.async_window, derive_seed(seed, {5}), opts.workers, opts.dt);
  StreamOptions o;
  o.dt = opts.dt;
  model.pulse_width =
      simulate_read_stream(params, 0.0, opts.circuit, opts.async_window, derive_seed(seed, {6}), o).mean_high_width;
  return model;
}

}  // namespace mtjsnn
