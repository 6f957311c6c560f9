#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mtjsnn/crossbar.hpp"

namespace mtjsnn {

enum class LayerType { conv, subsample, full };

const char* to_string(LayerType type);

// Maps-by-height-by-width activity volume.
struct Shape {
  std::size_t maps = 1, height = 1, width = 1;
  std::size_t size() const { return maps * height * width; }
  bool operator==(const Shape&) const = default;
};

struct Layer {
  LayerType type = LayerType::full;
  std::vector<std::size_t> kernel;  // conv: out, in, k, k; subsample: k, k; full: out, in
  std::vector<double> weights;      // row-major over `kernel`
  std::vector<double> bias;         // one per output map (conv) or neuron (full)
  Shape in, out;

  bool has_neurons() const { return type != LayerType::subsample; }
};

// Layered topology with trained weights. Effective pre-activation of a neuron is
// scale * (w . a + b), measured in units of the neuron's i_o.
struct NetworkSpec {
  Shape input{1, 28, 28};
  std::vector<Layer> layers;
  double scale = 1.0;

  std::size_t neuron_count() const;
  std::size_t output_count() const { return layers.empty() ? 0 : layers.back().out.size(); }
};

// Parses {input?: [c, h, w], layers: [{type, kernel, weights, bias}], scale}. Computes
// shapes and throws InvalidArgument on any inconsistency or unknown key.
NetworkSpec parse_network(std::istream& in);
NetworkSpec load_network(const std::filesystem::path& path);
void write_network(std::ostream& out, const NetworkSpec& net);

// Signed weights of a neuron layer as an unrolled (inputs + 1) x neurons matrix, already
// multiplied by net.scale. The last row carries the bias and is driven at activity 1.
SparseWeights unrolled_weights(const NetworkSpec& net, std::size_t layer_index);

// 2x2 (k x k) mean pooling of an activity volume.
void subsample(const Layer& layer, std::span<const double> in, std::span<double> out);

// Deterministic sigmoid forward pass. Returns the output activity of every layer
// (pooled layers included), in order.
std::vector<std::vector<double>> rate_forward(const NetworkSpec& net, std::span<const double> image);

std::size_t argmax(std::span<const double> v);

}  // namespace mtjsnn
