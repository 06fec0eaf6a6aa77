#include "assignflow/targets.hpp"

#include "assignflow/meta_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace assignflow {

namespace {

Vec normalized(Vec p) {
  const double total = p.sum();
  if (!(total > 0.0)) throw NumericError("target: degenerate mass");
  return p / total;
}

// Unnormalized anisotropic Gaussian on the grid, parameterized by center,
// principal axis angle and per-axis standard deviations.
void add_gaussian(Mat& grid, double cx, double cy, double angle, double s_major,
                  double s_minor, double weight) {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  for (Index ix = 0; ix < grid.rows(); ++ix) {
    for (Index iy = 0; iy < grid.cols(); ++iy) {
      const double dx = static_cast<double>(ix) - cx;
      const double dy = static_cast<double>(iy) - cy;
      const double major = ca * dx + sa * dy;
      const double minor = -sa * dx + ca * dy;
      grid(ix, iy) += weight * std::exp(-0.5 * (major * major / (s_major * s_major) +
                                                minor * minor / (s_minor * s_minor)));
    }
  }
}

Vec grid_to_joint(const Mat& grid) {
  Vec p(grid.size());
  Index pos = 0;
  for (Index ix = 0; ix < grid.rows(); ++ix) {
    for (Index iy = 0; iy < grid.cols(); ++iy) {
      p[pos++] = grid(ix, iy);
    }
  }
  return normalized(p);
}

}  // namespace

Vec coupled_binaries_target() {
  Vec p(4);
  p << 0.45, 0.05, 0.05, 0.45;
  return p;
}

Vec gaussian_mixture_target(Index c) {
  if (c < 4) throw DimsError("gaussian_mixture_target: need c >= 4");
  const double lo = std::round(0.27 * static_cast<double>(c - 1));
  const double hi = std::round(0.73 * static_cast<double>(c - 1));
  const double sigma = 0.055 * static_cast<double>(c);
  Mat grid = Mat::Zero(c, c);
  add_gaussian(grid, lo, lo, 0.0, sigma, sigma, 0.30);
  add_gaussian(grid, lo, hi, 0.0, sigma, sigma, 0.27);
  add_gaussian(grid, hi, lo, 0.0, sigma, sigma, 0.23);
  add_gaussian(grid, hi, hi, 0.0, sigma, sigma, 0.20);
  return grid_to_joint(grid);
}

Vec pinwheel_target(Index c) {
  if (c < 4) throw DimsError("pinwheel_target: need c >= 4");
  const double g0 = 0.5 * static_cast<double>(c - 1);
  const double twist = 1.1;
  Mat grid = Mat::Zero(c, c);
  for (int arm = 0; arm < 5; ++arm) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(arm) / 5.0;
    for (double rho : {0.35, 0.60, 0.85}) {
      const double theta = phi + twist * rho;
      const double cx = g0 + rho * g0 * std::cos(theta);
      const double cy = g0 + rho * g0 * std::sin(theta);
      // Elongate along the local spiral direction.
      const double axis = std::atan2(rho * g0 * twist * std::cos(theta) + g0 * std::sin(theta),
                                     g0 * std::cos(theta) - rho * g0 * twist * std::sin(theta));
      add_gaussian(grid, cx, cy, axis, 0.09 * static_cast<double>(c),
                   0.045 * static_cast<double>(c), 1.0);
    }
  }
  return grid_to_joint(grid);
}

NamedTarget named_target(const std::string& name, Index grid_c) {
  if (name == "coupled-binaries") {
    return {coupled_binaries_target(), Dims{2, 2}};
  }
  if (name == "gaussian-mixture") {
    return {gaussian_mixture_target(grid_c), Dims{2, grid_c}};
  }
  if (name == "pinwheel") {
    return {pinwheel_target(grid_c), Dims{2, grid_c}};
  }
  throw std::invalid_argument("unknown target '" + name +
                              "' (expected coupled-binaries, gaussian-mixture or pinwheel)");
}

std::vector<Configuration> sample_from_joint(const Vec& probs, const Dims& dims, Index count,
                                             std::mt19937_64& rng) {
  const std::int64_t size = joint_size(dims);
  if (probs.size() != size) {
    throw DimsError("sample_from_joint: joint has wrong length");
  }
  if (count < 0) throw std::invalid_argument("sample_from_joint: negative count");
  if (!probs.allFinite() || (probs.array() < 0.0).any()) {
    throw std::invalid_argument("sample_from_joint: invalid probabilities");
  }

  std::vector<double> cumulative(static_cast<std::size_t>(size));
  double acc = 0.0;
  for (std::int64_t a = 0; a < size; ++a) {
    acc += probs[a];
    cumulative[static_cast<std::size_t>(a)] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("sample_from_joint: zero total mass");
  cumulative.back() = acc;  // guard against roundoff undershoot

  std::uniform_real_distribution<double> uniform(0.0, acc);
  std::vector<Configuration> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    const double u = uniform(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto index = static_cast<std::int64_t>(
        std::min<std::ptrdiff_t>(it - cumulative.begin(), size - 1));
    samples.push_back(index_to_config(index, dims));
  }
  return samples;
}

}  // namespace assignflow
