#pragma once

#include "assignflow/common.hpp"

#include <random>
#include <string>
#include <vector>

namespace assignflow {

// n = 2, c = 2 joint (0.45, 0.05, 0.05, 0.45).
Vec coupled_binaries_target();

// Four well-separated isotropic Gaussian components discretized on a c x c
// grid (n = 2), with distinct weights so the mode ordering is strict.
Vec gaussian_mixture_target(Index c);

// Five-arm pinwheel of anisotropic Gaussian segments on a c x c grid (n = 2).
Vec pinwheel_target(Index c);

struct NamedTarget {
  Vec probs;
  Dims dims;
};

// Names: "coupled-binaries", "gaussian-mixture", "pinwheel".  grid_c selects
// the grid resolution for the two image-like targets.
NamedTarget named_target(const std::string& name, Index grid_c);

// Inverse-CDF sampling from a dense joint.
std::vector<Configuration> sample_from_joint(const Vec& probs, const Dims& dims, Index count,
                                             std::mt19937_64& rng);

}  // namespace assignflow
