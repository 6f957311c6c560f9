#include "mtjsnn/mtj_device.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mtjsnn/csv.hpp"

namespace mtjsnn {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double SwitchingCharacteristic::probability(double current) const {
  return sigmoid((current - i_bias) / i_o);
}

namespace {

std::size_t steps_for(double duration, double dt) {
  return static_cast<std::size_t>(duration / dt + 0.5);
}

bool run_trial(const LlgsStepper& stepper, double current, double pulse_width,
               const WriteProtocol& protocol, Rng& rng) {
  std::uint64_t step = 0;
  Vec3 m = stepper.run({-1.0, 0.0, 0.0}, 0.0, steps_for(protocol.warmup, protocol.dt), rng, step);
  step += steps_for(protocol.warmup, protocol.dt);
  if (m.x > 0.0) m.x = -m.x;
  if (protocol.pre_pulse) {
    const auto n = steps_for(protocol.pre_pulse->duration, protocol.dt);
    m = stepper.run(m, protocol.pre_pulse->current, n, rng, step);
    step += n;
  }
  HysteresisLatch latch(m.x > protocol.band, protocol.band);
  const auto pulse_steps = steps_for(pulse_width, protocol.dt);
  for (std::size_t i = 0; i < pulse_steps; ++i) {
    m = stepper.step(m, current, rng, step++);
    latch.update(m.x);
  }
  const auto settle_steps = steps_for(protocol.settle, protocol.dt);
  for (std::size_t i = 0; i < settle_steps; ++i) {
    m = stepper.step(m, 0.0, rng, step++);
    latch.update(m.x);
  }
  return latch.is_p();
}

SimConfig config_for(const WriteProtocol& protocol) {
  SimConfig c;
  c.dt = protocol.dt;
  return c;
}

std::vector<double> probabilities(const DeviceParams& params, std::span<const double> currents,
                                  double pulse_width, int n_trials, std::uint64_t seed,
                                  const WriteProtocol& protocol) {
  const LlgsStepper stepper(params, config_for(protocol));
  const std::size_t trials = static_cast<std::size_t>(n_trials);
  std::vector<unsigned char> switched(currents.size() * trials, 0);
  parallel_for(switched.size(), protocol.workers, [&](std::size_t k) {
    const std::size_t point = k / trials, trial = k % trials;
    Rng rng = make_stream(seed, {point, trial});
    switched[k] = run_trial(stepper, currents[point], pulse_width, protocol, rng) ? 1 : 0;
  });
  std::vector<double> p(currents.size());
  for (std::size_t i = 0; i < currents.size(); ++i) {
    const auto begin = switched.begin() + static_cast<std::ptrdiff_t>(i * trials);
    p[i] = static_cast<double>(std::accumulate(begin, begin + static_cast<std::ptrdiff_t>(trials), 0)) /
           static_cast<double>(trials);
  }
  return p;
}

// Current where the piecewise-linear curve first reaches level; nullopt if never.
std::optional<double> crossing(std::span<const double> x, std::span<const double> y, double level) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((y[i - 1] - level) * (y[i] - level) <= 0.0 && y[i] != y[i - 1]) {
      return x[i - 1] + (level - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace

bool write_trial(const DeviceParams& params, double current, double pulse_width,
                 const WriteProtocol& protocol, Rng& rng) {
  return run_trial(LlgsStepper(params, config_for(protocol)), current, pulse_width, protocol, rng);
}

double switching_probability(const DeviceParams& params, double current, double pulse_width,
                             int n_trials, std::uint64_t seed, const WriteProtocol& protocol) {
  const double c[] = {current};
  return probabilities(params, c, pulse_width, n_trials, seed, protocol).front();
}

SwitchingCharacteristic characterize_switching(const DeviceParams& params, double pulse_width,
                                               std::span<const double> currents, int n_trials,
                                               std::uint64_t seed, const WriteProtocol& protocol) {
  if (n_trials < 100) throw InvalidArgument("characterize_switching: n_trials must be >= 100");
  if (!(pulse_width > 0.0)) throw InvalidArgument("characterize_switching: pulse_width must be > 0");
  SwitchingCharacteristic c;
  c.currents.assign(currents.begin(), currents.end());
  c.p_switch = probabilities(params, currents, pulse_width, n_trials, seed, protocol);
  for (double p : c.p_switch) {
    if (std::isnan(p)) throw NumericalFailure("characterize_switching: NaN switching probability", 0);
  }
  c.n_trials = n_trials;
  c.pulse_width = pulse_width;
  const SigmoidFit fit = fit_sigmoid(c.currents, c.p_switch);
  c.i_bias = fit.i_bias;
  c.i_o = fit.i_o;
  c.fit_residual = fit.residual;
  try {
    c.delta_kbt = calibrate_barrier(params);
  } catch (const InvalidArgument&) {
    c.delta_kbt = 0.0;
  }
  return c;
}

std::vector<double> auto_current_grid(const DeviceParams& params, double pulse_width,
                                      std::uint64_t seed, const WriteProtocol& protocol, int points) {
  constexpr int kCoarseTrials = 200;
  constexpr double kLow = 0.03, kHigh = 0.97;
  const SimConfig cfg = config_for(protocol);
  // Critical-current scale alpha * (Hk + Ms * Nzz / 2) / torque-per-amp.
  const auto& n = params.demag_factors;
  const double ms = params.saturation_magnetization;
  const double scale = params.gilbert_damping * ms * ((n.yy - n.xx) + 0.5 * (n.zz - n.xx)) /
                       LlgsStepper(params, cfg).torque_field_per_amp();
  std::uint64_t probe = 0;
  auto p_at = [&](double current) {
    return switching_probability(params, current, pulse_width, kCoarseTrials,
                                 derive_seed(seed, {0xb7acULL, probe++}), protocol);
  };
  double lo = 0.0, hi = scale;
  for (int k = 0; p_at(lo) > kLow; ++k) {
    if (k > 40) throw InsufficientRange("auto_current_grid: no lower bracket found");
    lo = -scale * std::ldexp(1.0, k);
  }
  hi = std::max(hi, lo + scale);
  for (int k = 0; p_at(hi) < kHigh; ++k) {
    if (k > 40) throw InsufficientRange("auto_current_grid: no upper bracket found");
    hi = lo + scale * std::ldexp(1.0, k + 1);
  }
  // Tighten each end with a few bisections.
  for (int it = 0; it < 4; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double q = 0.75 * lo + 0.25 * hi;
    if (p_at(q) <= kLow) lo = q;
    const double r = 0.25 * lo + 0.75 * hi;
    if (p_at(r) >= kHigh) hi = r;
    if (hi - lo < 1e-3 * std::abs(mid)) break;
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

SigmoidFit fit_sigmoid(std::span<const double> currents, std::span<const double> p_switch) {
  if (currents.size() != p_switch.size()) throw InvalidArgument("fit_sigmoid: size mismatch");
  const std::size_t n = currents.size();
  if (n < 5) throw InsufficientRange("fit_sigmoid: need at least 5 points");
  const auto [pmin, pmax] = std::minmax_element(p_switch.begin(), p_switch.end());
  if (!(*pmin < 0.2 && *pmax > 0.8)) {
    throw InsufficientRange("fit_sigmoid: data must span p < 0.2 to p > 0.8");
  }

  // Work in scaled units so the normal equations are well conditioned.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return currents[a] < currents[b]; });
  std::vector<double> x(n), y(n);
  double scale = 0.0;
  for (double c : currents) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw InsufficientRange("fit_sigmoid: all currents are zero");
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = currents[order[i]] / scale;
    y[i] = p_switch[order[i]];
  }

  double b = crossing(x, y, 0.5).value_or(0.5 * (x.front() + x.back()));
  const auto q25 = crossing(x, y, 0.25), q75 = crossing(x, y, 0.75);
  double o = (q25 && q75 && *q75 > *q25) ? (*q75 - *q25) / 2.2 : (x.back() - x.front()) / 10.0;
  double log_o = std::log(o);

  auto cost = [&](double bb, double lo) {
    const double oo = std::exp(lo);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = sigmoid((x[i] - bb) / oo) - y[i];
      s += r * r;
    }
    return s;
  };

  double lambda = 1e-3;
  double current_cost = cost(b, log_o);
  int it = 0;
  bool done = false;
  for (; it < 500 && !done; ++it) {
    const double oo = std::exp(log_o);
    double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (x[i] - b) / oo;
      const double s = sigmoid(z);
      const double ds = s * (1.0 - s);
      const double r = s - y[i];
      const double jb = -ds / oo;
      const double jl = -ds * z;
      a11 += jb * jb;
      a12 += jb * jl;
      a22 += jl * jl;
      g1 += jb * r;
      g2 += jl * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      const double m11 = a11 * (1.0 + lambda), m22 = a22 * (1.0 + lambda);
      const double det = m11 * m22 - a12 * a12;
      if (det == 0.0) {
        lambda *= 10.0;
        continue;
      }
      const double db = (-g1 * m22 + g2 * a12) / det;
      const double dl = (-g2 * m11 + g1 * a12) / det;
      const double trial = cost(b + db, log_o + dl);
      if (trial <= current_cost) {
        const bool converged = std::abs(db) < 1e-13 && std::abs(dl) < 1e-13;
        b += db;
        log_o += dl;
        current_cost = trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        done = converged;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }

  SigmoidFit fit;
  fit.i_bias = b * scale;
  fit.i_o = std::exp(log_o) * scale;
  fit.iterations = it;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residual = std::max(fit.residual, std::abs(sigmoid((x[i] - b) / std::exp(log_o)) - y[i]));
  }
  return fit;
}

double calibrate_barrier(const DeviceParams& p) {
  const auto& n = p.demag_factors;
  if (!(n.yy > n.xx)) throw InvalidArgument("calibrate_barrier: invalid geometry (Nyy <= Nxx)");
  if (!(p.temperature > 0.0)) throw InvalidArgument("calibrate_barrier: temperature must be positive");
  const double ms = p.saturation_magnetization;
  return 0.5 * kPhysics.mu0 * ms * ms * p.volume() * (n.yy - n.xx) / (kPhysics.kB * p.temperature);
}

double retention_time(double delta_kbt, double tau0) { return tau0 * std::exp(delta_kbt); }

double retention_failure_probability(double delta_kbt, double t_read_ns) {
  if (t_read_ns < 0.0) throw InvalidArgument("retention_failure_probability: t_read must be >= 0");
  return -std::expm1(-t_read_ns * std::exp(-delta_kbt));
}

namespace {
double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}
}  // namespace

double RetentionStats::mean_p_dwell() const { return mean_of(p_dwell_samples); }
double RetentionStats::mean_ap_dwell() const { return mean_of(ap_dwell_samples); }
double RetentionStats::mean_dwell() const { return mean_of(dwell_samples); }

RetentionStats dwell_time_analysis(const DeviceParams& params, double bias_current, double duration,
                                   std::uint64_t seed, const DwellOptions& options) {
  RetentionStats stats;
  stats.barrier_height = calibrate_barrier(params);
  if (stats.barrier_height >= 5.0) {
    throw InvalidArgument("dwell_time_analysis: device is not superparamagnetic (barrier >= 5 kBT)");
  }
  stats.tau0 = options.tau0;
  stats.retention_time = retention_time(stats.barrier_height, options.tau0);

  SimConfig cfg;
  cfg.dt = options.dt;
  cfg.duration = duration;
  cfg.seed = seed;
  HysteresisLatch latch(true, options.band);
  bool started = false;
  double last_switch = 0.0, time_in_p = 0.0, prev_t = 0.0;
  evolve({1.0, 0.0, 0.0}, cfg, params, [&](double) { return bias_current; },
         [&](double t, const Vec3& m) {
           const bool was_p = latch.is_p();
           if (was_p) time_in_p += t - prev_t;
           prev_t = t;
           if (latch.update(m.x) != was_p) {
             ++stats.transitions;
             if (started) {
               const double dwell = t - last_switch;
               stats.dwell_samples.push_back(dwell);
               (was_p ? stats.p_dwell_samples : stats.ap_dwell_samples).push_back(dwell);
             }
             started = true;
             last_switch = t;
           }
         });
  stats.p_occupancy = duration > 0.0 ? time_in_p / duration : 0.0;
  if (stats.transitions < 20) {
    throw InsufficientStatistics("dwell_time_analysis: fewer than 20 transitions observed");
  }
  return stats;
}

void write_characteristic_csv(std::ostream& out, const SwitchingCharacteristic& c) {
  out << "current_A,p_switch,n_trials\n";
  for (std::size_t i = 0; i < c.currents.size(); ++i) {
    out << fmt_g17(c.currents[i]) << ',' << fmt_g17(c.p_switch[i]) << ',' << c.n_trials << '\n';
  }
}

void write_characteristic_json(std::ostream& out, const SwitchingCharacteristic& c) {
  nlohmann::ordered_json j;
  j["i_bias_A"] = c.i_bias;
  j["i_o_A"] = c.i_o;
  j["pulse_width_s"] = c.pulse_width;
  j["residual"] = c.fit_residual;
  j["delta_kbt"] = c.delta_kbt;
  out << j.dump(2) << '\n';
}

SwitchingCharacteristic read_characteristic(std::istream& csv, std::istream& json) {
  SwitchingCharacteristic c;
  std::string line;
  std::getline(csv, line);
  if (line != "current_A,p_switch,n_trials") throw InvalidArgument("characteristic CSV: bad header");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, n;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, n, ',');
    c.currents.push_back(std::stod(a));
    c.p_switch.push_back(std::stod(b));
    c.n_trials = std::stoi(n);
  }
  const auto j = nlohmann::json::parse(json);
  c.i_bias = j.at("i_bias_A").get<double>();
  c.i_o = j.at("i_o_A").get<double>();
  c.pulse_width = j.at("pulse_width_s").get<double>();
  c.fit_residual = j.at("residual").get<double>();
  c.delta_kbt = j.at("delta_kbt").get<double>();
  return c;
}

}  // namespace mtjsnn
