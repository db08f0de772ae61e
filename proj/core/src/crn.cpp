#include "zoqn/crn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zoqn {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Counter-based stream: successive mixing of seed, index and component makes
// every position addressable independently of evaluation order.
std::uint64_t stream_word(std::uint64_t run_seed, std::uint64_t index,
                          std::uint64_t component) noexcept {
  return mix64(mix64(mix64(run_seed) ^ index) ^ component);
}

// Maps a word to (0, 1]: the +1 keeps log() finite in Box-Muller.
double to_unit_open_zero(std::uint64_t w) noexcept {
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

// Maps a word to [0, 1).
double to_unit_half_open(std::uint64_t w) noexcept {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

}  // namespace

double counter_uniform01(std::uint64_t run_seed, std::uint64_t index,
                         std::uint64_t component) noexcept {
  return to_unit_half_open(stream_word(run_seed, index, component));
}

Eigen::VectorXd realize_noise(SampleId id, int dim, NoiseDistribution dist,
                              double sigma) {
  if (dim < 1) throw std::invalid_argument("realize_noise: dim must be >= 1");
  Eigen::VectorXd z(dim);
  switch (dist) {
    case NoiseDistribution::Gaussian: {
      for (int q = 0; 2 * q < dim; ++q) {
        const double u1 = to_unit_open_zero(
            stream_word(id.run_seed, id.index, 2 * static_cast<std::uint64_t>(q)));
        const double u2 = to_unit_half_open(
            stream_word(id.run_seed, id.index, 2 * static_cast<std::uint64_t>(q) + 1));
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        z(2 * q) = sigma * r * std::cos(phi);
        if (2 * q + 1 < dim) z(2 * q + 1) = sigma * r * std::sin(phi);
      }
      break;
    }
    case NoiseDistribution::UniformSym: {
      for (int c = 0; c < dim; ++c) {
        const double u = to_unit_half_open(
            stream_word(id.run_seed, id.index, static_cast<std::uint64_t>(c)));
        z(c) = 2.0 * u - 1.0;
      }
      break;
    }
  }
  return z;
}

SampleSet draw_set(std::uint64_t run_seed, std::size_t count,
                   std::uint64_t& next_index) {
  if (count == 0) throw std::invalid_argument("draw_set: count must be >= 1");
  SampleSet set;
  set.ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    set.ids.push_back(SampleId{run_seed, next_index++});
  }
  return set;
}

void augment_set(SampleSet& set, std::uint64_t run_seed, std::size_t count,
                 std::uint64_t& next_index) {
  set.ids.reserve(set.ids.size() + count);
  for (std::size_t i = 0; i < count; ++i) {
    set.ids.push_back(SampleId{run_seed, next_index++});
  }
}

}  // namespace zoqn
