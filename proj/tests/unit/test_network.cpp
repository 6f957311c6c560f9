#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mtjsnn/mtj_device.hpp"
#include "mtjsnn/network.hpp"

using namespace mtjsnn;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("rate_forward matches a direct convolution and pooling") {
  const auto net = tiny_network(3);
  const auto img = tiny_image(4);
  const auto& conv = net.layers[0];
  double c[2][4][4];
  for (int o = 0; o < 2; ++o) {
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) {
        double z = conv.bias[o];
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) z += conv.weights[o * 9 + ky * 3 + kx] * img[(y + ky) * 6 + x + kx];
        }
        c[o][y][x] = logistic(z);
      }
    }
  }
  double pooled[8];
  for (int o = 0; o < 2; ++o) {
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 2; ++x) {
        pooled[o * 4 + y * 2 + x] =
            0.25 * (c[o][2 * y][2 * x] + c[o][2 * y + 1][2 * x] + c[o][2 * y][2 * x + 1] + c[o][2 * y + 1][2 * x + 1]);
      }
    }
  }
  const auto& fc = net.layers[2];
  const auto acts = rate_forward(net, img);
  REQUIRE(acts.size() == 3);
  CHECK(acts[0][2 * 16 - 1] == doctest::Approx(c[1][3][3]).epsilon(1e-12));
  for (int i = 0; i < 8; ++i) CHECK(acts[1][i] == doctest::Approx(pooled[i]).epsilon(1e-12));
  for (int n = 0; n < 3; ++n) {
    double z = fc.bias[n];
    for (int m = 0; m < 8; ++m) z += fc.weights[n * 8 + m] * pooled[m];
    CHECK(acts[2][n] == doctest::Approx(logistic(z)).epsilon(1e-12));
  }
}

TEST_CASE("network shapes and unrolled weights") {
  const auto net = tiny_network(1);
  CHECK(net.layers[0].out == Shape{2, 4, 4});
  CHECK(net.layers[1].out == Shape{2, 2, 2});
  CHECK(net.neuron_count() == 35);
  CHECK(net.output_count() == 3);
  const auto w = unrolled_weights(net, 2);
  CHECK(w.rows == 9);
  CHECK(w.cols == 3);
  CHECK_THROWS_AS(unrolled_weights(net, 1), InvalidArgument);
}

TEST_CASE("scale multiplies every weight and bias") {
  auto net = tiny_network(1);
  const auto a = unrolled_weights(net, 0);
  net.scale = 2.5;
  const auto b = unrolled_weights(net, 0);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(b.entries[i].weight == doctest::Approx(2.5 * a.entries[i].weight));
}

TEST_CASE("network JSON rejects malformed documents") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_network(in);
  };
  CHECK_THROWS_AS(parse("{\"layers\": [], \"extra\": 1}"), InvalidArgument);
  CHECK_THROWS_AS(parse("{\"layers\": []}"), InvalidArgument);
  CHECK_THROWS_AS(parse("not json"), InvalidArgument);
  CHECK_THROWS_AS(parse(R"({"input":[1,2,2],"layers":[{"type":"full","kernel":[1,4],"weights":[1,2,3],"bias":[0]}]})"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse(R"({"input":[1,2,2],"layers":[{"type":"pool","kernel":[2,2]}]})"), InvalidArgument);
  CHECK_THROWS_AS(parse(R"({"input":[1,2,2],"layers":[{"type":"full","kernel":[1,4],"weights":[1,2,3,4],"bias":[0],"w":1}]})"),
                  InvalidArgument);
  CHECK_NOTHROW(parse(R"({"input":[1,2,2],"layers":[{"type":"full","kernel":[1,4],"weights":[1,2,3,4],"bias":[0]}]})"));
}

TEST_CASE("network JSON round trip") {
  const auto net = tiny_network(8);
  std::stringstream s;
  write_network(s, net);
  const auto back = parse_network(s);
  CHECK(back.layers.size() == net.layers.size());
  CHECK(back.layers[2].weights == net.layers[2].weights);
  const auto img = tiny_image(1);
  CHECK(rate_forward(back, img)[2][1] == rate_forward(net, img)[2][1]);
}

TEST_CASE("argmax picks the first maximum") {
  const std::vector<double> v{0.1, 0.7, 0.7, 0.2};
  CHECK(argmax(v) == 1);
}
