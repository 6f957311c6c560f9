#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "mtjsnn/crossbar.hpp"
#include "mtjsnn/dataset.hpp"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/llgs.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/rng.hpp"
#include "mtjsnn/snn_engine.hpp"

using namespace mtjsnn;

static void BM_LlgsStep(benchmark::State& state) {
  const auto params = preset_device_1kbt();
  const LlgsStepper stepper(params, SimConfig{});
  Rng rng = make_stream(1, {0});
  Vec3 m{1.0, 0.0, 0.0};
  std::uint64_t i = 0;
  for (auto _ : state) {
    m = stepper.step(m, 1e-6, rng, i++);
    benchmark::DoNotOptimize(m.x);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LlgsStep);

static void BM_ColumnCurrents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> w(0.0, 1.0);
  std::vector<double> dense(n * n);
  for (auto& x : dense) x = w(gen);
  auto cb = program(SparseWeights::from_dense(dense, n, n), 5e-6, 0.0, 4);
  configure_supply(cb, 1e-6);
  std::vector<double> activity(n), out(n);
  std::bernoulli_distribution spike(0.5);
  for (auto& a : activity) a = spike(gen) ? 1.0 : 0.0;
  for (auto _ : state) {
    column_currents(cb, activity, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_ColumnCurrents)->Arg(64)->Arg(256)->Arg(1024);

// One full-network inference of one MNIST image; the 0.5 ns curve is stubbed with
// round numbers so the benchmark does not depend on a characterization run.
static void BM_Inference(benchmark::State& state) {
  const auto mode = state.range(0) ? OperatingMode::asynchronous : OperatingMode::synchronous;
  const auto net = load_network(std::string(MTJSNN_DATA_DIR) + "/lenet_sigmoid.json");
  const auto data = load_idx(std::string(MTJSNN_DATA_DIR) + "/mnist/test-images.idx3-ubyte",
                             std::string(MTJSNN_DATA_DIR) + "/mnist/test-labels.idx1-ubyte");
  NeuronModel model;
  model.device = mode == OperatingMode::synchronous ? preset_device_10kbt() : preset_device_1kbt();
  model.characteristic.i_bias = mode == OperatingMode::synchronous ? 16e-6 : 0.0;
  model.characteristic.i_o = mode == OperatingMode::synchronous ? 2.6e-6 : 0.56e-6;
  model.pulse_width = 8.9e-9;
  model.reset_current = -35e-6;
  EngineConfig cfg;
  cfg.mode = mode;
  cfg.workers = 1;
  const SnnSimulator sim(net, model, cfg, 5);
  const double t = mode == OperatingMode::synchronous ? 40e-9 : 100e-9;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto trace = sim.run(data.image(0), t, seed++);
    benchmark::DoNotOptimize(trace.predicted.data());
  }
}
BENCHMARK(BM_Inference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
