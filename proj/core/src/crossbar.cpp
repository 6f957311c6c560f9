#include "mtjsnn/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "mtjsnn/csv.hpp"
#include "mtjsnn/errors.hpp"
#include "mtjsnn/rng.hpp"

namespace mtjsnn {

SparseWeights SparseWeights::from_dense(std::span<const double> row_major, std::size_t rows,
                                        std::size_t cols) {
  if (row_major.size() != rows * cols) throw InvalidArgument("from_dense: size does not match rows x cols");
  SparseWeights w{rows, cols, {}};
  w.entries.reserve(row_major.size());
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t n = 0; n < cols; ++n) {
      w.entries.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n), row_major[m * cols + n]});
    }
  }
  return w;
}

std::pair<double, double> CrossbarInstance::conductance(std::size_t m, std::size_t n) const {
  for (const auto& p : row(m)) {
    if (p.col == n) return {p.g_plus, p.g_minus};
  }
  return {0.0, 0.0};
}

CrossbarInstance program(const SparseWeights& weights, double g_o, double variation_sigma,
                         std::uint64_t seed, double g_off) {
  if (!(g_o > 0.0)) throw InvalidArgument("program: g_o must be > 0");
  if (!(variation_sigma >= 0.0)) throw InvalidArgument("program: variation_sigma must be >= 0");
  if (!(g_off >= 0.0)) throw InvalidArgument("program: g_off must be >= 0");
  CrossbarInstance cb;
  cb.inputs = weights.rows;
  cb.neurons = weights.cols;
  cb.g_o = g_o;
  cb.variation_sigma = variation_sigma;
  cb.g_off = g_off;

  std::vector<std::size_t> order(weights.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    const auto& x = weights.entries[a];
    const auto& y = weights.entries[b];
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });

  Rng rng = make_stream(seed, {0x5eedULL});
  std::normal_distribution<double> normal(0.0, 1.0);
  cb.row_start.assign(cb.inputs + 1, 0);
  cb.points.reserve(order.size());
  for (std::size_t idx : order) {
    const auto& e = weights.entries[idx];
    if (e.row >= cb.inputs || e.col >= cb.neurons) throw InvalidArgument("program: weight entry out of range");
    double g = std::abs(e.weight) * g_o;
    // One draw per entry keeps the stream aligned across sigma values.
    const double z = normal(rng);
    if (variation_sigma > 0.0) g = std::max(0.0, g * (1.0 + variation_sigma * z));
    Crosspoint p{e.col, g_off, g_off};
    (e.weight >= 0.0 ? p.g_plus : p.g_minus) = g;
    if (e.weight == 0.0) p.g_plus = g_off;
    cb.points.push_back(p);
    ++cb.row_start[e.row + 1];
  }
  for (std::size_t m = 0; m < cb.inputs; ++m) cb.row_start[m + 1] += cb.row_start[m];
  cb.row_conductance.assign(cb.inputs, 0.0);
  for (std::size_t m = 0; m < cb.inputs; ++m) {
    for (const auto& p : cb.row(m)) cb.row_conductance[m] += p.g_plus + p.g_minus;
  }
  return cb;
}

void configure_supply(CrossbarInstance& cb, double i_o) {
  if (!(i_o > 0.0)) throw InvalidArgument("configure_supply: i_o must be > 0");
  cb.delta_v = i_o / cb.g_o;
}

void column_currents(const CrossbarInstance& cb, std::span<const double> activity, double supply_noise,
                     std::span<double> out) {
  if (activity.size() != cb.inputs) throw InvalidArgument("column_currents: activity length != inputs");
  if (out.size() != cb.neurons) throw InvalidArgument("column_currents: output length != neurons");
  std::fill(out.begin(), out.end(), 0.0);
  const double v = cb.delta_v + supply_noise;
  for (std::size_t m = 0; m < cb.inputs; ++m) {
    const double a = activity[m];
    if (a == 0.0) continue;
    const double av = a * v;
    for (const auto& p : cb.row(m)) out[p.col] += av * (p.g_plus - p.g_minus);
  }
}

std::vector<double> column_currents(const CrossbarInstance& cb, std::span<const double> activity,
                                    double supply_noise) {
  std::vector<double> out(cb.neurons);
  column_currents(cb, activity, supply_noise, out);
  return out;
}

double synapse_energy(const CrossbarInstance& cb, std::span<const double> activity, double duration) {
  if (activity.size() != cb.inputs) throw InvalidArgument("synapse_energy: activity length != inputs");
  if (!(duration >= 0.0)) throw InvalidArgument("synapse_energy: duration must be >= 0");
  double g = 0.0;
  for (std::size_t m = 0; m < cb.inputs; ++m) g += activity[m] * cb.row_conductance[m];
  return cb.delta_v * cb.delta_v * g * duration;
}

void write_conductance_csv(std::ostream& out, const CrossbarInstance& cb) {
  out << "row,col,g_plus_S,g_minus_S\n";
  for (std::size_t m = 0; m < cb.inputs; ++m) {
    for (const auto& p : cb.row(m)) {
      out << m << ',' << p.col << ',' << fmt_g17(p.g_plus) << ',' << fmt_g17(p.g_minus) << '\n';
    }
  }
}

}  // namespace mtjsnn
