#include "doctest.h"

#include "assignflow/meta_simplex.hpp"
#include "assignflow/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

using namespace assignflow;

namespace {

bool is_joint(const Vec& probs) {
  return probs.allFinite() && (probs.array() >= 0.0).all() &&
         std::abs(probs.sum() - 1.0) < 1e-12;
}

std::vector<Index> top_indices(const Vec& probs, std::size_t k) {
  std::vector<Index> order(static_cast<std::size_t>(probs.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(),
                    [&](Index a, Index b) { return probs[a] > probs[b]; });
  order.resize(k);
  return order;
}

}  // namespace

TEST_CASE("coupled_binaries_target: frozen joint") {
  Vec p = coupled_binaries_target();
  REQUIRE(p.size() == 4);
  CHECK(p[0] == 0.45);
  CHECK(p[1] == 0.05);
  CHECK(p[2] == 0.05);
  CHECK(p[3] == 0.45);
  CHECK(is_joint(p));
}

TEST_CASE("gaussian_mixture_target: four strictly ordered modes at the expected cells") {
  for (Index c : {Index(8), Index(16)}) {
    Vec p = gaussian_mixture_target(c);
    REQUIRE(p.size() == c * c);
    CHECK(is_joint(p));

    const auto lo = static_cast<Index>(std::llround(0.27 * static_cast<double>(c - 1)));
    const auto hi = static_cast<Index>(std::llround(0.73 * static_cast<double>(c - 1)));
    const Dims dims{2, c};
    std::vector<Index> expected = {
        config_to_index({static_cast<int>(lo), static_cast<int>(lo)}, dims),
        config_to_index({static_cast<int>(lo), static_cast<int>(hi)}, dims),
        config_to_index({static_cast<int>(hi), static_cast<int>(lo)}, dims),
        config_to_index({static_cast<int>(hi), static_cast<int>(hi)}, dims)};

    std::vector<Index> top = top_indices(p, 4);
    CHECK(top == expected);  // heaviest first: weights 0.30 > 0.27 > 0.23 > 0.20

    // Strict ordering among the four component centers.
    CHECK(p[expected[0]] > p[expected[1]]);
    CHECK(p[expected[1]] > p[expected[2]]);
    CHECK(p[expected[2]] > p[expected[3]]);
  }
  CHECK_THROWS_AS(gaussian_mixture_target(3), DimsError);
}

TEST_CASE("pinwheel_target: a valid, well-spread joint") {
  Vec p = pinwheel_target(16);
  REQUIRE(p.size() == 256);
  CHECK(is_joint(p));
  CHECK((p.array() > 0.0).all());  // Gaussian tails reach every cell

  // Mass is concentrated away from a single cell but not uniform.
  CHECK(p.maxCoeff() < 0.1);
  CHECK(p.maxCoeff() > 2.0 / 256.0);

  // Five-fold structure: every arm contributes, so the mass in each angular
  // fifth of the grid (around the center) is of the same order.
  const double g0 = 7.5;
  Vec fifth = Vec::Zero(5);
  for (Index ix = 0; ix < 16; ++ix) {
    for (Index iy = 0; iy < 16; ++iy) {
      const double angle = std::atan2(static_cast<double>(iy) - g0,
                                      static_cast<double>(ix) - g0);
      const double wrapped = angle < 0.0 ? angle + 2.0 * std::numbers::pi : angle;
      const auto bin = std::min<Index>(4, static_cast<Index>(wrapped / (2.0 * std::numbers::pi / 5.0)));
      fifth[bin] += p[ix * 16 + iy];
    }
  }
  CHECK(fifth.minCoeff() > 0.05);
  CHECK(fifth.maxCoeff() < 0.5);

  CHECK_THROWS_AS(pinwheel_target(2), DimsError);
}

TEST_CASE("named_target: name dispatch and grid dimensions") {
  NamedTarget cb = named_target("coupled-binaries", 16);
  CHECK(cb.dims == Dims{2, 2});
  CHECK((cb.probs - coupled_binaries_target()).cwiseAbs().maxCoeff() == 0.0);

  NamedTarget gm = named_target("gaussian-mixture", 8);
  CHECK(gm.dims == Dims{2, 8});
  CHECK(gm.probs.size() == 64);

  NamedTarget pw = named_target("pinwheel", 12);
  CHECK(pw.dims == Dims{2, 12});
  CHECK(pw.probs.size() == 144);

  CHECK_THROWS_AS(named_target("swirl", 16), std::invalid_argument);
}

TEST_CASE("sample_from_joint: deterministic and distributed like the joint") {
  const Dims dims{2, 2};
  Vec p = coupled_binaries_target();

  std::mt19937_64 rng_a(5);
  std::mt19937_64 rng_b(5);
  auto sa = sample_from_joint(p, dims, 1000, rng_a);
  auto sb = sample_from_joint(p, dims, 1000, rng_b);
  CHECK(sa == sb);
  REQUIRE(sa.size() == 1000);

  std::mt19937_64 rng(7);
  auto samples = sample_from_joint(p, dims, 200000, rng);
  Vec empirical = empirical_joint(samples, dims);
  CHECK(tv_distance(empirical, p) < 0.01);

  // An unnormalized joint is rescaled implicitly by inverse-CDF sampling.
  std::mt19937_64 rng_c(7);
  auto scaled = sample_from_joint(Vec(4.0 * p), dims, 200000, rng_c);
  CHECK(tv_distance(empirical_joint(scaled, dims), p) < 0.01);

  // A point mass always yields the same configuration.
  Vec dirac = Vec::Zero(4);
  dirac[2] = 1.0;
  std::mt19937_64 rng_d(11);
  for (const Configuration& s : sample_from_joint(dirac, dims, 50, rng_d)) {
    CHECK(s == Configuration{1, 0});
  }

  std::mt19937_64 rng_e(13);
  CHECK(sample_from_joint(p, dims, 0, rng_e).empty());
  CHECK_THROWS_AS(sample_from_joint(Vec::Ones(3), dims, 1, rng_e), DimsError);
  CHECK_THROWS_AS(sample_from_joint(p, dims, -1, rng_e), std::invalid_argument);
  CHECK_THROWS_AS(sample_from_joint(Vec::Zero(4), dims, 1, rng_e), std::invalid_argument);
  Vec negative = p;
  negative[0] = -0.1;
  CHECK_THROWS_AS(sample_from_joint(negative, dims, 1, rng_e), std::invalid_argument);
}
