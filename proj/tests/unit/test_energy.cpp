#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/energy.hpp"

using namespace mtjsnn;

namespace {

EvaluationResult handmade(OperatingMode mode) {
  EvaluationResult r;
  r.mode = mode;
  r.checkpoint_steps = {1, 2, 10};
  r.timestep = 4e-9;
  r.time_s = {4e-9, 8e-9, 40e-9};
  r.accuracy = {0.5, 0.97, 0.99};
  r.neuron_j = {1e-12, 2e-12, 10e-12};
  r.synapse_j = {3e-12, 6e-12, 30e-12};
  r.toggles = {10, 20, 100};
  r.neurons = 100;
  r.n_images = 10;
  return r;
}

}  // namespace

TEST_CASE("neuron energy is sum I^2 R t") {
  const std::vector<double> i{1e-6, -2e-6};
  CHECK(neuron_energy(i, 1000.0, 1e-9) == doctest::Approx(5e-12 * 1000.0 * 1e-9));
  CHECK_THROWS_AS(neuron_energy(i, 0.0, 1e-9), InvalidArgument);
}

TEST_CASE("read energy arithmetic") {
  ReadCircuitParams c;
  EnergyConstants k;
  const double r = 2000.0;
  CHECK(read_energy_sync(3, 10, c, r, k) == doctest::Approx(30 * (70e-15 + 1e-14 * 2000 * 1e-9)));
  CHECK(read_energy_async(1e-8, 10, 4, c, r, k) ==
        doctest::Approx((6.5e-6 + 1e-14 * 2000) * 1e-8 * 10 + 4 * 5e-15));
  const auto d = preset_device_10kbt();
  CHECK(read_path_resistance(d) == doctest::Approx(0.5 * (d.mgo_resistance_p + d.mgo_resistance_ap)));
}

TEST_CASE("report picks the first checkpoint at the target") {
  const auto d = preset_device_10kbt();
  ReadCircuitParams c;
  const auto r = report(handmade(OperatingMode::synchronous), d, c, 0.96);
  CHECK(r.time_to_target == doctest::Approx(8e-9));
  CHECK(r.accuracy == doctest::Approx(0.97));
  CHECK(r.neuron_j == doctest::Approx(2e-12));
  CHECK(r.read_j == doctest::Approx(read_energy_sync(2, 100, c, read_path_resistance(d))));
  CHECK(r.total_j == doctest::Approx(r.neuron_j + r.synapse_j + r.read_j));
  CHECK(r.device_delta == doctest::Approx(calibrate_barrier(d)));

  const auto a = energy_at(handmade(OperatingMode::asynchronous), 2, d, c);
  CHECK(a.read_j == doctest::Approx(read_energy_async(40e-9, 100, 100, c, read_path_resistance(d))));
}

TEST_CASE("unreached target carries the best accuracy") {
  const auto d = preset_device_10kbt();
  try {
    report(handmade(OperatingMode::synchronous), d, {}, 0.995);
    FAIL("expected TargetUnreached");
  } catch (const TargetUnreached& e) {
    CHECK(e.best_accuracy() == doctest::Approx(0.99));
  }
  CHECK_THROWS_AS(energy_at(handmade(OperatingMode::synchronous), 3, d, {}), InvalidArgument);
}

TEST_CASE("energy JSON and CSV carry the same numbers") {
  EnergyReport r;
  r.neuron_j = 1.5e-12;
  r.synapse_j = 2e-10;
  r.read_j = 3e-9;
  r.total_j = 3.2015e-9;
  r.time_to_target = 20e-9;
  r.device_delta = 13.9;
  std::stringstream js, csv;
  write_energy_json(js, r);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["synapse_j"].get<double>() == 2e-10);
  CHECK(j["mode"] == "sync");
  write_energy_csv_header(csv);
  write_energy_csv_row(csv, r);
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "delta_kbt,mode,neuron_j,synapse_j,read_j,total_j,time_ns");
  CHECK(std::stod(row.substr(0, row.find(','))) == 13.9);
  CHECK(row.find(",sync,") != std::string::npos);
  CHECK(std::stod(row.substr(row.rfind(',') + 1)) == doctest::Approx(20.0));
}
