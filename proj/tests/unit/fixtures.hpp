#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtjsnn/network.hpp"

// 1x6x6 -> conv 2@3x3 -> pool 2 -> full 3, random weights.
inline std::string tiny_network_json(unsigned seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
  };
  nlohmann::json j;
  j["input"] = {1, 6, 6};
  j["scale"] = 1.0;
  j["layers"] = nlohmann::json::array();
  j["layers"].push_back({{"type", "conv"}, {"kernel", {2, 1, 3, 3}}, {"weights", draw(18)}, {"bias", draw(2)}});
  j["layers"].push_back({{"type", "subsample"}, {"kernel", {2, 2}}});
  j["layers"].push_back({{"type", "full"}, {"kernel", {3, 8}}, {"weights", draw(24)}, {"bias", draw(3)}});
  return j.dump();
}

inline mtjsnn::NetworkSpec tiny_network(unsigned seed, double spread = 1.0) {
  std::istringstream in(tiny_network_json(seed, spread));
  return mtjsnn::parse_network(in);
}

inline std::vector<double> tiny_image(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(36);
  for (double& x : v) x = u(rng);
  return v;
}
