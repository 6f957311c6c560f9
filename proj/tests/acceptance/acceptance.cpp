// Acceptance run: one PASS/FAIL line per criterion. Sizes follow the documented
// budgets; --quick shrinks every Monte Carlo count for a smoke run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/dataset.hpp"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/energy.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/mtj_device.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/readout.hpp"
#include "mtjsnn/snn_engine.hpp"

#ifndef MTJSNN_DATA_DIR
#define MTJSNN_DATA_DIR "data"
#endif

using namespace mtjsnn;

namespace {

struct Budget {
  int trials = 1000;
  int points = 13;
  double dwell_window = 10e-6;
  double backaction_window = 20e-6;
  int backaction_runs = 8;
  std::size_t rate_steps = 20000;
  int sync_cycles = 4000;
  std::size_t async_ticks = 40000;
  double async_char_window = 10e-6;
  std::size_t images = 500;
  int n_mc = 50;
  std::size_t sweep_images = 50;
  double sweep_async_time = 200e-9;
  std::size_t norm_steps = 1000000;
};

Budget quick_budget() {
  Budget b;
  b.trials = 200;
  b.dwell_window = 2e-6;
  b.backaction_window = 4e-6;
  b.backaction_runs = 2;
  b.rate_steps = 2000;
  b.sync_cycles = 300;
  b.async_ticks = 4000;
  b.async_char_window = 1e-6;
  b.images = 60;
  b.n_mc = 3;
  b.sweep_images = 20;
  b.norm_steps = 100000;
  return b;
}

int failures = 0;
auto t_start = std::chrono::steady_clock::now();

void verdict(int id, bool ok, const std::string& title, const std::string& detail) {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::printf("%s %2d  %s: %s  [%.0f s]\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), s);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string f(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

// Rate of a single free-running device neuron over n steps at a constant drive.
double device_rate(const NeuronModel& model, const EngineConfig& cfg, double drive, std::size_t n,
                   std::uint64_t seed) {
  DeviceNeuron neuron(model, cfg, make_stream(seed, {}));
  std::size_t on = 0;
  for (std::size_t i = 0; i < n; ++i) on += static_cast<std::size_t>(neuron.step(drive));
  return static_cast<double>(on) / static_cast<double>(n);
}

// First checkpoint time whose accuracy is within 1% of the run's final accuracy.
double plateau_time(const EvaluationResult& r) {
  for (std::size_t k = 0; k < r.accuracy.size(); ++k) {
    if (r.accuracy[k] >= r.final_accuracy() - 0.01) return r.time_s[k];
  }
  return r.time_s.back();
}

struct PairedDrop {
  double mean = 0.0;
  double se = 0.0;
};

// Accuracy loss of `varied` against `base`, paired repetition by repetition.
PairedDrop drop(const SweepPoint& base, const SweepPoint& varied) {
  const std::size_t n = base.accuracies.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = base.accuracies[k] - varied.accuracies[k];
  PairedDrop p;
  p.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - p.mean) * (x - p.mean);
  p.se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  Budget b;
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--quick")) b = quick_budget();
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  auto want = [&](int id) { return !only || *only == id; };
  const unsigned workers = default_workers();
  const auto devices = preset_devices();  // 1, 2, 10, 20 kBT

  // 1, 2: 0.5 ns write curves of the four reference devices.
  if (want(1) || want(2)) {
    std::vector<SwitchingCharacteristic> curves;
    std::vector<double> p_at_bias;
    for (std::size_t d = 0; d < devices.size(); ++d) {
      WriteProtocol proto;
      proto.workers = workers;
      const auto grid = auto_current_grid(devices[d], 0.5e-9, derive_seed(101, {d, 1}), proto, b.points);
      curves.push_back(characterize_switching(devices[d], 0.5e-9, grid, b.trials, derive_seed(101, {d, 2}), proto));
      p_at_bias.push_back(
          switching_probability(devices[d], curves.back().i_bias, 0.5e-9, b.trials, derive_seed(101, {d, 3}), proto));
    }
    if (want(1)) {
      bool ok = true;
      std::string detail;
      for (std::size_t d = 0; d < devices.size(); ++d) {
        ok = ok && std::abs(p_at_bias[d] - 0.5) <= 0.04;
        detail += devices[d].name + " P(i_bias=" + f("%.3f", curves[d].i_bias * 1e6) + "uA)=" + f("%.3f", p_at_bias[d]) + " ";
      }
      verdict(1, ok, "sigmoid identity at bias (0.5 +- 0.04)", detail);
    }
    if (want(2)) {
      bool ok = true;
      std::string ib = "i_bias[20,10,2,1]=", io = "i_o=", res = "residual=";
      for (std::size_t k = devices.size(); k-- > 0;) {
        ib += f("%.3f ", curves[k].i_bias * 1e6);
        io += f("%.3f ", curves[k].i_o * 1e6);
        res += f("%.3f ", curves[k].fit_residual);
        ok = ok && curves[k].fit_residual < 0.05;
        if (k > 0) ok = ok && curves[k].i_bias > curves[k - 1].i_bias && curves[k].i_o > curves[k - 1].i_o;
      }
      verdict(2, ok, "i_bias and i_o decrease with barrier, residual < 0.05", ib + "uA " + io + "uA " + res);
    }
  }

  if (want(3)) {
    const double p = retention_failure_probability(4.6, 1.0);
    verdict(3, std::abs(p - 0.01) <= 0.001, "retention failure at 4.6 kBT over 1 ns", f("P=%.5f", p));
  }

  if (want(4)) {
    const auto& d = devices[0];
    const auto zero = dwell_time_analysis(d, 0.0, b.dwell_window, 401);
    const auto bias = dwell_time_analysis(d, 1.5e-6, b.dwell_window, 402);
    const bool ok = std::abs(zero.p_occupancy - 0.5) <= 0.05 && bias.p_occupancy > 0.6;
    verdict(4, ok, "telegraphic symmetry of 1 kBT",
            f("P occupancy %.3f at 0 uA", zero.p_occupancy) + f(", %.3f at +1.5 uA", bias.p_occupancy) +
                f(", %.0f transitions", static_cast<double>(zero.transitions)) + f(" in %.0f us", b.dwell_window * 1e6));
  }

  if (want(5)) {
    // Same thermal streams with and without the read current.
    const auto& d = devices[0];
    ReadCircuitParams circuit;
    std::vector<double> with(b.backaction_runs), without(b.backaction_runs);
    parallel_for(static_cast<std::size_t>(b.backaction_runs), workers, [&](std::size_t k) {
      StreamOptions o;
      o.trajectory_index = k;
      o.read_backaction = true;
      with[k] = simulate_read_stream(d, 0.0, circuit, b.backaction_window, 501, o).mean_output;
      o.read_backaction = false;
      without[k] = simulate_read_stream(d, 0.0, circuit, b.backaction_window, 501, o).mean_output;
    });
    const double mw = std::accumulate(with.begin(), with.end(), 0.0) / b.backaction_runs;
    const double mo = std::accumulate(without.begin(), without.end(), 0.0) / b.backaction_runs;
    verdict(5, std::abs(mw - mo) < 0.05, "read back-action on 1 kBT average output",
            f("with %.4f", mw) + f(", without %.4f", mo) + f(", shift %.4f", mw - mo) +
                f(" over %.0f us", b.backaction_runs * b.backaction_window * 1e6));
  }

  if (want(6)) {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-3.0, 3.0), a(0.0, 1.0);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
      const std::size_t rows = 1 + rng() % 300, cols = 1 + rng() % 40;
      std::vector<double> w(rows * cols);
      for (double& x : w) x = rng() % 3 == 0 ? 0.0 : u(rng);
      auto cb = program(SparseWeights::from_dense(w, rows, cols), 5e-6, 0.15, rng(), 2e-8);
      configure_supply(cb, 1e-6 + 4e-6 * a(rng));
      std::vector<double> act(rows);
      for (double& x : act) x = rng() % 2 ? a(rng) : std::round(a(rng));
      const double noise = 0.02 * (a(rng) - 0.5);
      const auto got = column_currents(cb, act, noise);
      for (std::size_t n = 0; n < cols; ++n) {
        long double expect = 0.0L, scale = 0.0L;
        for (std::size_t m = 0; m < rows; ++m) {
          const auto [gp, gm] = cb.conductance(m, n);
          const long double term = static_cast<long double>(act[m]) * (cb.delta_v + noise) * (gp - gm);
          expect += term;
          scale += std::abs(term);
        }
        if (scale > 0) worst = std::max(worst, static_cast<double>(std::abs(got[n] - expect) / scale));
      }
    }
    verdict(6, worst <= 1e-12, "crossbar column currents vs brute-force product", f("max relative error %.2e", worst));
  }

  // Shared network, data and neuron models for 7-11.
  const auto net = load_network(std::string(MTJSNN_DATA_DIR) + "/lenet_sigmoid.json");
  const auto data = load_idx(std::string(MTJSNN_DATA_DIR) + "/mnist/test-images.idx3-ubyte",
                             std::string(MTJSNN_DATA_DIR) + "/mnist/test-labels.idx1-ubyte");
  NeuronCharacterization nc;
  nc.n_trials = b.trials;
  nc.points = b.points;
  nc.async_window = b.async_char_window;
  nc.workers = workers;
  std::map<std::string, NeuronModel> models;
  auto model = [&](std::size_t d, OperatingMode mode) -> const NeuronModel& {
    const std::string key = devices[d].name + to_string(mode);
    if (!models.count(key)) models[key] = characterize_neuron(devices[d], mode, nc, derive_seed(700, {d}));
    return models[key];
  };
  EngineConfig sync_cfg, async_cfg;
  sync_cfg.workers = async_cfg.workers = workers;
  async_cfg.mode = OperatingMode::asynchronous;

  if (want(7)) {
    const auto& m = model(2, OperatingMode::synchronous);
    const SnnSimulator sim(net, m, sync_cfg, 77);
    const auto img = data.image(0);
    const auto emp = sim.empirical_rates(img, b.rate_steps, 78);
    const auto det = rate_forward(net, img);
    const double bound = 3.0 / std::sqrt(static_cast<double>(b.rate_steps));
    double sup = 0.0;
    std::string per_layer = "per-layer sup";
    for (std::size_t l = 0; l < det.size(); ++l) {
      double s = 0.0;
      for (std::size_t n = 0; n < det[l].size(); ++n) s = std::max(s, std::abs(emp[l][n] - det[l][n]));
      per_layer += f(" %.4f", s);
      sup = std::max(sup, s);
    }
    verdict(7, sup <= bound, "empirical rates converge to sigmoid activations",
            f("sup %.4f", sup) + f(" vs bound %.4f", bound) + f(" (n=%.0f); ", static_cast<double>(b.rate_steps)) + per_layer);
  }

  if (want(8)) {
    bool ok = true;
    std::string detail;
    {
      const auto& m = model(2, OperatingMode::synchronous);
      EngineConfig cfg = sync_cfg;
      const double io = m.characteristic.i_o;
      int k = 0;
      detail += "10kBT sync";
      for (double drive : {-io, 0.0, io}) {
        const double rate = device_rate(m, cfg, drive, static_cast<std::size_t>(b.sync_cycles), derive_seed(801, {static_cast<std::uint64_t>(k++)}));
        const double p = spike_probability(drive, m.characteristic, neuron_bias(m.characteristic, cfg.mode));
        ok = ok && std::abs(rate - p) <= 0.04;
        detail += f(" %+.3f", rate - p);
      }
    }
    {
      const auto& m = model(0, OperatingMode::asynchronous);
      EngineConfig cfg = async_cfg;
      const double io = m.characteristic.i_o;
      int k = 0;
      detail += "; 1kBT async";
      for (double drive : {-io, 0.0, io}) {
        const double rate = device_rate(m, cfg, drive, b.async_ticks, derive_seed(802, {static_cast<std::uint64_t>(k++)}));
        const double p = spike_probability(drive, m.characteristic, 0.0);
        ok = ok && std::abs(rate - p) <= 0.04;
        detail += f(" %+.3f", rate - p);
      }
    }
    verdict(8, ok, "device vs fitted-sigmoid spike rate (+-0.04) at -i_o, 0, +i_o", "rate - p: " + detail);
  }

  std::map<std::string, EvaluationResult> runs;
  auto evaluation = [&](std::size_t d, OperatingMode mode) -> const EvaluationResult& {
    const std::string key = devices[d].name + to_string(mode);
    if (!runs.count(key)) {
      const auto& m = model(d, mode);
      const SnnSimulator sim(net, m, mode == OperatingMode::synchronous ? sync_cfg : async_cfg, 900);
      runs[key] = evaluate(sim, data, mode == OperatingMode::synchronous ? 120e-9 : 400e-9, 901, b.images);
    }
    return runs[key];
  };

  if (want(9)) {
    const double oracle = oracle_accuracy(net, data, b.images);
    const auto& s = evaluation(2, OperatingMode::synchronous);
    const auto& a = evaluation(0, OperatingMode::asynchronous);
    const double ts = plateau_time(s), ta = plateau_time(a);
    const bool ok = std::abs(s.final_accuracy() - oracle) <= 0.02 && std::abs(a.final_accuracy() - oracle) <= 0.02 && ts < ta;
    verdict(9, ok, "stochastic accuracy within 2% of oracle, sync plateaus first",
            f("oracle %.3f", oracle) + f(", 10kBT sync %.3f", s.final_accuracy()) +
                f(" (plateau %.0f ns)", ts * 1e9) + f(", 1kBT async %.3f", a.final_accuracy()) +
                f(" (plateau %.0f ns)", ta * 1e9) + f(", %.0f images", static_cast<double>(b.images)));
  }

  if (want(10)) {
    const auto& ms = model(2, OperatingMode::synchronous);
    const auto& ma = model(0, OperatingMode::asynchronous);
    auto sweep = [&](SweepKind kind, std::vector<double> values, OperatingMode mode) {
      SweepRequest r;
      r.kind = kind;
      r.values = std::move(values);
      r.n_mc = b.n_mc;
      r.n_images = b.sweep_images;
      r.total_time = mode == OperatingMode::synchronous ? 120e-9 : b.sweep_async_time;
      r.seed = 1000;
      return mode == OperatingMode::synchronous ? sweep_variations(net, ms, sync_cfg, data, r)
                                                : sweep_variations(net, ma, async_cfg, data, r);
    };
    const auto syn_s = sweep(SweepKind::synapse_sigma, {0.0, 0.2}, OperatingMode::synchronous);
    const auto syn_a = sweep(SweepKind::synapse_sigma, {0.0, 0.2}, OperatingMode::asynchronous);
    const auto sup_s = sweep(SweepKind::supply_mv, {0.0, 25.0}, OperatingMode::synchronous);
    const auto sup_a = sweep(SweepKind::supply_mv, {0.0, 25.0}, OperatingMode::asynchronous);
    const auto cm_s = sweep(SweepKind::cmos_sigma, {0.0, -2.0, 2.0}, OperatingMode::synchronous);
    const auto cm_a = sweep(SweepKind::cmos_sigma, {0.0, -2.0, 2.0}, OperatingMode::asynchronous);
    const auto d_syn_s = drop(syn_s[0], syn_s[1]), d_syn_a = drop(syn_a[0], syn_a[1]);
    const auto d_sup_s = drop(sup_s[0], sup_s[1]), d_sup_a = drop(sup_a[0], sup_a[1]);
    const auto d_cm_s_lo = drop(cm_s[0], cm_s[1]), d_cm_s_hi = drop(cm_s[0], cm_s[2]);
    const auto d_cm_a_lo = drop(cm_a[0], cm_a[1]), d_cm_a_hi = drop(cm_a[0], cm_a[2]);
    // "Degrades": paired mean drop above two standard errors and at least 0.5%.
    auto degrades = [](const PairedDrop& p) { return p.mean > std::max(2.0 * p.se, 0.005); };
    const bool a = d_syn_a.mean > d_syn_s.mean;
    const bool s = d_sup_s.mean < 0.01 && d_sup_a.mean > d_sup_s.mean;
    const bool c = (degrades(d_cm_a_lo) || degrades(d_cm_a_hi)) && !degrades(d_cm_s_lo) && !degrades(d_cm_s_hi);
    verdict(10, a && s && c, "variation orderings (synapse 20%, supply 25 mV, CMOS +-2 sigma)",
            f("synapse drop sync %.4f", d_syn_s.mean) + f(" async %.4f", d_syn_a.mean) + (a ? " ok" : " X") +
                f("; supply drop sync %.4f", d_sup_s.mean) + f(" async %.4f", d_sup_a.mean) + (s ? " ok" : " X") +
                f("; cmos drop sync %.4f", d_cm_s_lo.mean) + f("/%.4f", d_cm_s_hi.mean) +
                f(" async %.4f", d_cm_a_lo.mean) + f("/%.4f", d_cm_a_hi.mean) + f(" (se %.4f)", d_cm_a_hi.se) +
                (c ? " ok" : " X") + "; " + std::to_string(b.n_mc) + " reps x " + std::to_string(b.sweep_images) + " images" +
                f(", base sync %.3f", syn_s[0].mean_accuracy) + f(" async %.3f", syn_a[0].mean_accuracy));
  }

  if (want(11)) {
    struct Row {
      std::size_t d;
      OperatingMode mode;
      EnergyReport e;
      bool reached = true;
    };
    std::vector<Row> rows{{0, OperatingMode::asynchronous, {}},
                          {1, OperatingMode::asynchronous, {}},
                          {2, OperatingMode::synchronous, {}},
                          {3, OperatingMode::synchronous, {}}};
    ReadCircuitParams circuit;
    std::string detail;
    for (auto& r : rows) {
      const auto& ev = evaluation(r.d, r.mode);
      try {
        r.e = report(ev, devices[r.d], circuit, 0.96);
      } catch (const TargetUnreached&) {
        r.e = energy_at(ev, ev.accuracy.size() - 1, devices[r.d], circuit);
        r.reached = false;
      }
      detail += devices[r.d].name + "/" + to_string(r.mode) + f(" n=%.3g", r.e.neuron_j) + f(" s=%.3g", r.e.synapse_j) +
                f(" r=%.3g", r.e.read_j) + f(" T=%.3g J", r.e.total_j) + f(" @%.0f ns", r.e.time_to_target * 1e9) +
                (r.reached ? "" : " (96% not reached)") + "; ";
    }
    const auto &e1 = rows[0].e, &e2 = rows[1].e, &e10 = rows[2].e, &e20 = rows[3].e;
    const bool neuron_order = e1.neuron_j < e2.neuron_j && e2.neuron_j < e10.neuron_j && e10.neuron_j < e20.neuron_j;
    const bool read_order = std::min(e1.read_j, e2.read_j) > std::max(e10.read_j, e20.read_j);
    bool neuron_small = true;
    for (const auto& r : rows) {
      neuron_small = neuron_small && 10.0 * r.e.neuron_j <= r.e.synapse_j && 10.0 * r.e.neuron_j <= r.e.read_j;
    }
    const bool total_order = e10.total_j <= 1.2 * e1.total_j && e1.total_j < std::min(e20.total_j, e2.total_j);
    verdict(11, neuron_order && read_order && neuron_small && total_order, "energy orderings",
            std::string("neuron rises with barrier ") + (neuron_order ? "ok" : "X") + ", async read > sync read " +
                (read_order ? "ok" : "X") + ", neuron >=10x below synapse/read " + (neuron_small ? "ok" : "X") +
                ", total 10s <~ 1a < {20s, 2a} " + (total_order ? "ok" : "X") + " | " + detail);
  }

  if (want(12)) {
    auto d = devices[2];
    d.temperature = 0.0;
    auto switch_time = [&](double dt) {
      SimConfig c;
      c.dt = dt;
      c.duration = 10e-9;
      double tprev = 0.0, xprev = 0.0, hit = -1.0;
      evolve(normalized(Vec3{-1.0, 0.05, 0.02}), c, d, [](double) { return 80e-6; }, [&](double t, const Vec3& m) {
        if (hit < 0.0 && t > 0.0 && xprev < 0.0 && m.x >= 0.0) hit = tprev - xprev * (t - tprev) / (m.x - xprev);
        tprev = t;
        xprev = m.x;
      });
      return hit;
    };
    std::vector<double> t;
    for (double dt = 8e-12; dt >= 0.5e-12; dt /= 2) t.push_back(switch_time(dt));
    double order = 1e9;
    std::string orders;
    for (std::size_t k = 0; k + 2 < t.size(); ++k) {
      const double o = std::log2(std::abs(t[k] - t[k + 1]) / std::abs(t[k + 1] - t[k + 2]));
      orders += f(" %.2f", o);
      order = std::min(order, o);
    }
    // Norm drift over 1e6 thermal steps of the 1 kBT device, both with the default
    // per-step renormalization and without it.
    auto drift = [&](bool renormalize) {
      SimConfig c;
      c.renormalize_each_step = renormalize;
      const LlgsStepper s(devices[0], c);
      Rng rng = make_stream(1200, {});
      Vec3 m{1, 0, 0};
      double worst = 0.0;
      for (std::size_t i = 0; i < b.norm_steps; ++i) {
        m = s.step(m, 0.0, rng, i);
        worst = std::max(worst, std::abs(norm(m) - 1.0));
      }
      return worst;
    };
    const double with = drift(true), without = drift(false);
    verdict(12, order >= 1.8 && with <= 1e-6, "Heun order and unit norm",
            "orders" + orders + f("; |m|-1 max %.2e", with) + f(" renormalized, %.2e raw", without) +
                f(" over %.0f steps", static_cast<double>(b.norm_steps)));
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
