#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace mtjsnn {

struct WeightEntry {
  std::uint32_t row = 0;  // input
  std::uint32_t col = 0;  // neuron
  double weight = 0.0;
};

// Signed weights on a rows x cols grid. Absent entries have no crosspoint.
struct SparseWeights {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<WeightEntry> entries;

  static SparseWeights from_dense(std::span<const double> row_major, std::size_t rows, std::size_t cols);
};

struct Crosspoint {
  std::uint32_t col = 0;
  double g_plus = 0.0;   // S, to the V+ line
  double g_minus = 0.0;  // S, to the V- line
};

// Programmed conductance pairs stored by input row.
struct CrossbarInstance {
  std::size_t inputs = 0;
  std::size_t neurons = 0;
  double g_o = 5e-6;        // S per unit weight
  double delta_v = 0.0;     // V, i_o / g_o once configured
  double variation_sigma = 0.0;
  double g_off = 0.0;       // S, conductance of the unused device of each pair
  std::vector<std::size_t> row_start;  // CSR offsets, size inputs + 1
  std::vector<Crosspoint> points;
  std::vector<double> row_conductance;  // sum of g_plus + g_minus per row

  std::span<const Crosspoint> row(std::size_t m) const {
    return {points.data() + row_start[m], points.data() + row_start[m + 1]};
  }
  // Dense (g_plus, g_minus) at (m, n); zero when there is no crosspoint.
  std::pair<double, double> conductance(std::size_t m, std::size_t n) const;
};

// Positive w programs g_plus = w g_o, negative w programs g_minus = |w| g_o; the other
// device of the pair sits at g_off. Each programmed conductance is scaled by
// (1 + N(0, variation_sigma)) and clamped at 0.
CrossbarInstance program(const SparseWeights& weights, double g_o, double variation_sigma,
                         std::uint64_t seed, double g_off = 0.0);

// Sets delta_v = i_o / g_o so a unit weight delivers one i_o.
void configure_supply(CrossbarInstance& cb, double i_o);

// I_n = sum_m a_m (delta_v + supply_noise) (g_plus - g_minus). Activities are row
// drive fractions (spikes are 0/1).
std::vector<double> column_currents(const CrossbarInstance& cb, std::span<const double> activity,
                                    double supply_noise = 0.0);
// Accumulating form; `out` must have cb.neurons entries and is overwritten.
void column_currents(const CrossbarInstance& cb, std::span<const double> activity,
                     double supply_noise, std::span<double> out);

// sum_m a_m delta_v^2 (g_plus + g_minus) duration over every driven row.
double synapse_energy(const CrossbarInstance& cb, std::span<const double> activity, double duration);

// row,col,g_plus_S,g_minus_S
void write_conductance_csv(std::ostream& out, const CrossbarInstance& cb);

}  // namespace mtjsnn
