#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace zoqn {

/// Identifies one realization of the stochastic sample zeta within a run.
///
/// The realized noise vector is a pure function of (run_seed, index), so the
/// same sample can be re-evaluated at different points (common random
/// numbers) and sample sets can be augmented without disturbing earlier
/// draws. Indices are assigned monotonically and never reused within a run.
struct SampleId {
  std::uint64_t run_seed = 0;
  std::uint64_t index = 0;

  friend bool operator==(const SampleId&, const SampleId&) = default;
};

/// Ordered set of sample ids; ids are strictly increasing by index and
/// duplicates are forbidden.
struct SampleSet {
  std::vector<SampleId> ids;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

enum class NoiseDistribution {
  Gaussian,    // N(0, sigma^2) per component
  UniformSym,  // Uniform(-1, 1) per component
};

/// Stateless SplitMix64 finalizer used to key the counter-based stream.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Uniform draw in [0, 1) from the counter stream keyed by
/// (run_seed, index, component).
double counter_uniform01(std::uint64_t run_seed, std::uint64_t index,
                         std::uint64_t component) noexcept;

/// Realizes the noise vector zeta(id) of length `dim`.
///
/// Gaussian components are produced pairwise by Box-Muller from the counter
/// stream; uniform components are mapped affinely from the same stream. The
/// result is bit-identical across calls and platforms for equal inputs.
/// `sigma` scales gaussian components and is ignored for UniformSym.
Eigen::VectorXd realize_noise(SampleId id, int dim, NoiseDistribution dist,
                              double sigma = 1.0);

/// Draws `count` fresh ids starting at `next_index` and advances the index
/// counter. Throws std::invalid_argument when count == 0.
SampleSet draw_set(std::uint64_t run_seed, std::size_t count,
                   std::uint64_t& next_index);

/// Appends `count` fresh ids to `set`, leaving existing ids untouched.
void augment_set(SampleSet& set, std::uint64_t run_seed, std::size_t count,
                 std::uint64_t& next_index);

}  // namespace zoqn
