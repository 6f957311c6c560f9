#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mtjsnn/device_params.hpp"
#include "mtjsnn/mtj_device.hpp"

using namespace mtjsnn;

TEST_CASE("logistic fit recovers known parameters from binomial data") {
  std::mt19937_64 rng(17);
  const double ib = 12e-6, io = 2.5e-6;
  std::vector<double> i, p;
  for (int k = 0; k < 15; ++k) {
    const double c = ib + (k - 7) * 1e-6;
    std::binomial_distribution<int> draw(5000, 1.0 / (1.0 + std::exp(-(c - ib) / io)));
    i.push_back(c);
    p.push_back(draw(rng) / 5000.0);
  }
  const auto f = fit_sigmoid(i, p);
  CHECK(f.i_bias == doctest::Approx(ib).epsilon(0.01));
  CHECK(f.i_o == doctest::Approx(io).epsilon(0.03));
  CHECK(f.residual < 0.02);
}

TEST_CASE("logistic fit is translation equivariant and order independent") {
  std::vector<double> i, p;
  for (int k = 0; k < 9; ++k) {
    i.push_back((k - 4) * 0.5e-6);
    p.push_back(1.0 / (1.0 + std::exp(-(i.back() - 0.2e-6) / 0.6e-6)));
  }
  const auto a = fit_sigmoid(i, p);
  std::vector<double> shifted = i, rev_i(i.rbegin(), i.rend()), rev_p(p.rbegin(), p.rend());
  for (double& x : shifted) x += 3e-6;
  const auto b = fit_sigmoid(shifted, p);
  const auto c = fit_sigmoid(rev_i, rev_p);
  CHECK(b.i_bias - a.i_bias == doctest::Approx(3e-6).epsilon(1e-6));
  CHECK(b.i_o == doctest::Approx(a.i_o).epsilon(1e-6));
  CHECK(c.i_bias == doctest::Approx(a.i_bias).epsilon(1e-9));
}

TEST_CASE("logistic fit rejects data that does not span the transition") {
  const std::vector<double> i{1, 2, 3, 4, 5}, p{0.3, 0.4, 0.5, 0.6, 0.7};
  CHECK_THROWS_AS(fit_sigmoid(i, p), InsufficientRange);
  const std::vector<double> few{1, 2, 3}, fp{0.0, 0.5, 1.0};
  CHECK_THROWS_AS(fit_sigmoid(few, fp), InsufficientRange);
}

TEST_CASE("barrier of the reference devices") {
  // 1/2 mu0 Ms^2 V (Nyy - Nxx) / kT, with the prism factors.
  const auto d = preset_device_10kbt();
  const double mu0 = 1.25663706212e-6, kT = 1.380649e-23 * 300;
  const double expect = 0.5 * mu0 * 1e12 * 75e-9 * 30e-9 * 1.2e-9 * (d.demag_factors.yy - d.demag_factors.xx) / kT;
  CHECK(calibrate_barrier(d) == doctest::Approx(expect).epsilon(1e-12));
  double last = 0.0;
  for (const auto& dev : preset_devices()) {
    CHECK(calibrate_barrier(dev) > last);
    last = calibrate_barrier(dev);
  }
  auto bad = make_device("round", 20e-9, 20e-9, 1e-9, 1e6);
  CHECK_THROWS_AS(calibrate_barrier(bad), InvalidArgument);
}

TEST_CASE("retention failure probability") {
  CHECK(retention_failure_probability(4.6, 1.0) == doctest::Approx(0.01).epsilon(0.1));
  CHECK(retention_failure_probability(4.6, 1.0) == doctest::Approx(1.0 - std::exp(-std::exp(-4.6))));
  CHECK(retention_failure_probability(3.0, 0.0) == 0.0);
  CHECK(retention_failure_probability(2.0, 1.0) > retention_failure_probability(3.0, 1.0));
  CHECK(retention_time(0.0) == doctest::Approx(kDefaultTau0));
  CHECK_THROWS_AS(retention_failure_probability(4.6, -1.0), InvalidArgument);
}

TEST_CASE("switching probability extremes and determinism") {
  const auto d = preset_device_10kbt();
  WriteProtocol proto;
  proto.warmup = 1e-9;
  CHECK(switching_probability(d, 0.0, 0.5e-9, 100, 1, proto) == 0.0);
  CHECK(switching_probability(d, 300e-6, 0.5e-9, 100, 1, proto) == 1.0);
  proto.workers = 1;
  const double a = switching_probability(d, 20e-6, 0.5e-9, 100, 9, proto);
  proto.workers = 3;
  CHECK(switching_probability(d, 20e-6, 0.5e-9, 100, 9, proto) == a);
}

TEST_CASE("characterize_switching argument checks") {
  const auto d = preset_device_10kbt();
  const std::vector<double> grid{0, 1e-6};
  CHECK_THROWS_AS(characterize_switching(d, 0.5e-9, grid, 99, 1), InvalidArgument);
  CHECK_THROWS_AS(characterize_switching(d, 0.0, grid, 100, 1), InvalidArgument);
}

TEST_CASE("characteristic CSV/JSON round trip") {
  SwitchingCharacteristic c;
  c.currents = {-1e-6, 0.0, 1e-6};
  c.p_switch = {0.1, 0.5, 0.9};
  c.n_trials = 1000;
  c.pulse_width = 0.5e-9;
  c.i_bias = 1.25e-7;
  c.i_o = 4.5e-7;
  c.fit_residual = 0.01;
  c.delta_kbt = 0.98;
  std::stringstream csv, js;
  write_characteristic_csv(csv, c);
  write_characteristic_json(js, c);
  const auto r = read_characteristic(csv, js);
  CHECK(r.currents == c.currents);
  CHECK(r.p_switch == c.p_switch);
  CHECK(r.i_bias == c.i_bias);
  CHECK(r.i_o == c.i_o);
  CHECK(r.n_trials == 1000);
  CHECK(r.probability(c.i_bias) == doctest::Approx(0.5));
}

TEST_CASE("dwell analysis is limited to superparamagnets") {
  CHECK_THROWS_AS(dwell_time_analysis(preset_device_10kbt(), 0.0, 1e-9, 1), InvalidArgument);
  CHECK_THROWS_AS(dwell_time_analysis(preset_device_1kbt(), 0.0, 1e-10, 1), InsufficientStatistics);
}

TEST_CASE("hysteresis latch holds inside the band") {
  HysteresisLatch l(false, 0.5);
  CHECK_FALSE(l.update(0.4));
  CHECK(l.update(0.6));
  CHECK(l.update(-0.4));
  CHECK_FALSE(l.update(-0.6));
}
