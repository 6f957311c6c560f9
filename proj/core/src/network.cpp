#include "mtjsnn/network.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/mtj_device.hpp"

namespace mtjsnn {

using nlohmann::json;

const char* to_string(LayerType type) {
  switch (type) {
    case LayerType::conv: return "conv";
    case LayerType::subsample: return "subsample";
    case LayerType::full: return "full";
  }
  return "?";
}

std::size_t NetworkSpec::neuron_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    if (l.has_neurons()) n += l.out.size();
  }
  return n;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw InvalidArgument(where + ": unknown key '" + key + "'");
    }
  }
}

LayerType parse_type(const std::string& s) {
  if (s == "conv") return LayerType::conv;
  if (s == "subsample") return LayerType::subsample;
  if (s == "full") return LayerType::full;
  throw InvalidArgument("network: unknown layer type '" + s + "'");
}

void resolve_shape(Layer& l, const Shape& in, std::size_t index) {
  const std::string where = "network layer " + std::to_string(index);
  l.in = in;
  std::size_t expect_weights = 0, expect_bias = 0;
  switch (l.type) {
    case LayerType::conv: {
      if (l.kernel.size() != 4 || l.kernel[2] != l.kernel[3]) {
        throw InvalidArgument(where + ": conv kernel must be [out, in, k, k]");
      }
      const std::size_t k = l.kernel[2];
      if (l.kernel[1] != in.maps || k == 0 || k > in.height || k > in.width) {
        throw InvalidArgument(where + ": conv kernel does not fit input " + std::to_string(in.maps) + "x" +
                              std::to_string(in.height) + "x" + std::to_string(in.width));
      }
      l.out = {l.kernel[0], in.height - k + 1, in.width - k + 1};
      expect_weights = l.kernel[0] * l.kernel[1] * k * k;
      expect_bias = l.kernel[0];
      break;
    }
    case LayerType::subsample: {
      if (l.kernel.size() != 2 || l.kernel[0] != l.kernel[1] || l.kernel[0] == 0 ||
          in.height % l.kernel[0] != 0 || in.width % l.kernel[0] != 0) {
        throw InvalidArgument(where + ": subsample kernel must be [k, k] dividing the input");
      }
      l.out = {in.maps, in.height / l.kernel[0], in.width / l.kernel[0]};
      break;
    }
    case LayerType::full: {
      if (l.kernel.size() != 2 || l.kernel[1] != in.size()) {
        throw InvalidArgument(where + ": full kernel must be [out, " + std::to_string(in.size()) + "]");
      }
      l.out = {l.kernel[0], 1, 1};
      expect_weights = l.kernel[0] * l.kernel[1];
      expect_bias = l.kernel[0];
      break;
    }
  }
  if (l.weights.size() != expect_weights) throw InvalidArgument(where + ": wrong number of weights");
  if (l.bias.empty() && expect_bias > 0) l.bias.assign(expect_bias, 0.0);
  if (l.bias.size() != expect_bias) throw InvalidArgument(where + ": wrong number of biases");
}

}  // namespace

NetworkSpec parse_network(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("network: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("network: document must be an object");
  reject_unknown(doc, {"input", "layers", "scale"}, "network");
  NetworkSpec net;
  try {
    if (doc.contains("input")) {
      const auto dims = doc["input"].get<std::vector<std::size_t>>();
      if (dims.size() != 3) throw InvalidArgument("network: input must be [maps, height, width]");
      net.input = {dims[0], dims[1], dims[2]};
    }
    net.scale = doc.value("scale", 1.0);
    Shape shape = net.input;
    std::size_t index = 0;
    for (const auto& jl : doc.at("layers")) {
      reject_unknown(jl, {"type", "kernel", "weights", "bias"}, "network layer " + std::to_string(index));
      Layer l;
      l.type = parse_type(jl.at("type").get<std::string>());
      l.kernel = jl.at("kernel").get<std::vector<std::size_t>>();
      if (jl.contains("weights")) l.weights = jl["weights"].get<std::vector<double>>();
      if (jl.contains("bias")) l.bias = jl["bias"].get<std::vector<double>>();
      resolve_shape(l, shape, index++);
      shape = l.out;
      net.layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("network: ") + e.what());
  }
  if (net.layers.empty()) throw InvalidArgument("network: no layers");
  if (!net.layers.back().has_neurons()) throw InvalidArgument("network: last layer must have neurons");
  if (!(net.scale > 0.0)) throw InvalidArgument("network: scale must be > 0");
  return net;
}

NetworkSpec load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open network file " + path.string());
  return parse_network(in);
}

void write_network(std::ostream& out, const NetworkSpec& net) {
  json doc;
  doc["input"] = {net.input.maps, net.input.height, net.input.width};
  doc["scale"] = net.scale;
  doc["layers"] = json::array();
  for (const auto& l : net.layers) {
    json jl;
    jl["type"] = to_string(l.type);
    jl["kernel"] = l.kernel;
    if (l.has_neurons()) {
      jl["weights"] = l.weights;
      jl["bias"] = l.bias;
    }
    doc["layers"].push_back(std::move(jl));
  }
  out << doc.dump() << '\n';
}

SparseWeights unrolled_weights(const NetworkSpec& net, std::size_t layer_index) {
  const Layer& l = net.layers.at(layer_index);
  if (!l.has_neurons()) throw InvalidArgument("unrolled_weights: layer has no neurons");
  SparseWeights w;
  w.rows = l.in.size() + 1;
  w.cols = l.out.size();
  const auto bias_row = static_cast<std::uint32_t>(l.in.size());
  if (l.type == LayerType::full) {
    const std::size_t n_in = l.kernel[1];
    w.entries.reserve(w.rows * w.cols);
    for (std::size_t n = 0; n < w.cols; ++n) {
      for (std::size_t m = 0; m < n_in; ++m) {
        w.entries.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n),
                             net.scale * l.weights[n * n_in + m]});
      }
      w.entries.push_back({bias_row, static_cast<std::uint32_t>(n), net.scale * l.bias[n]});
    }
    return w;
  }
  const std::size_t k = l.kernel[2];
  const std::size_t cin = l.in.maps;
  for (std::size_t o = 0; o < l.out.maps; ++o) {
    for (std::size_t y = 0; y < l.out.height; ++y) {
      for (std::size_t x = 0; x < l.out.width; ++x) {
        const auto n = static_cast<std::uint32_t>((o * l.out.height + y) * l.out.width + x);
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto m = static_cast<std::uint32_t>((c * l.in.height + y + ky) * l.in.width + x + kx);
              w.entries.push_back({m, n, net.scale * l.weights[((o * cin + c) * k + ky) * k + kx]});
            }
          }
        }
        w.entries.push_back({bias_row, n, net.scale * l.bias[o]});
      }
    }
  }
  return w;
}

void subsample(const Layer& l, std::span<const double> in, std::span<double> out) {
  const std::size_t k = l.kernel[0];
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::size_t c = 0; c < l.out.maps; ++c) {
    for (std::size_t y = 0; y < l.out.height; ++y) {
      for (std::size_t x = 0; x < l.out.width; ++x) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < k; ++dy) {
          for (std::size_t dx = 0; dx < k; ++dx) s += in[(c * l.in.height + y * k + dy) * l.in.width + x * k + dx];
        }
        out[(c * l.out.height + y) * l.out.width + x] = s * inv;
      }
    }
  }
}

std::vector<std::vector<double>> rate_forward(const NetworkSpec& net, std::span<const double> image) {
  if (image.size() != net.input.size()) throw InvalidArgument("rate_forward: image size does not match input");
  std::vector<std::vector<double>> acts;
  std::vector<double> a(image.begin(), image.end());
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& l = net.layers[li];
    std::vector<double> z(l.out.size(), 0.0);
    if (l.type == LayerType::subsample) {
      subsample(l, a, z);
    } else {
      const auto w = unrolled_weights(net, li);
      for (const auto& e : w.entries) z[e.col] += e.weight * (e.row == l.in.size() ? 1.0 : a[e.row]);
      for (double& v : z) v = sigmoid(v);
    }
    a = z;
    acts.push_back(std::move(z));
  }
  return acts;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace mtjsnn
