#pragma once

// Shared helpers for the unit and acceptance suites.

#include "assignflow/field.hpp"
#include "assignflow/flow_matching.hpp"
#include "assignflow/geometry.hpp"
#include "assignflow/integrator.hpp"
#include "assignflow/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace testsupport {

using namespace assignflow;

// Block-diagonal embedding of the per-factor tangent basis.
inline Mat full_basis(const Dims& dims) {
  const Mat q = build_basis(dims.c);
  Mat blocks = Mat::Zero(dims.state_size(), dims.n * (dims.c - 1));
  for (Index i = 0; i < dims.n; ++i) {
    blocks.block(i * dims.c, i * (dims.c - 1), dims.c, dims.c - 1) = q;
  }
  return blocks;
}

// udot = const; exact RK4 integration, zero divergence.
class ConstantField final : public TangentField {
 public:
  ConstantField(Vec value, Dims dims) : value_(std::move(value)), dims_(dims) {}
  Dims dims() const override { return dims_; }
  Mat eval(const Mat& u) const override { return value_.replicate(1, u.cols()); }
  Mat vjp(const Mat& u, const Mat& upstream) const override {
    return Mat::Zero(u.rows(), upstream.cols());
  }

 private:
  Vec value_;
  Dims dims_;
};

// udot = B A B^T u for the orthonormal tangent basis B; in basis coordinates
// the flow is the linear system with matrix A, so the time-1 map is e^A and
// the divergence is trace(A).
class LinearBasisField final : public TangentField {
 public:
  LinearBasisField(Mat a, Dims dims) : a_(std::move(a)), dims_(dims), basis_(full_basis(dims)) {}
  Dims dims() const override { return dims_; }
  Mat eval(const Mat& u) const override {
    return basis_ * (a_ * (basis_.transpose() * u));
  }
  Mat vjp(const Mat&, const Mat& upstream) const override {
    return basis_ * (a_.transpose() * (basis_.transpose() * upstream));
  }
  const Mat& basis() const { return basis_; }
  const Mat& matrix() const { return a_; }

 private:
  Mat a_;
  Dims dims_;
  Mat basis_;
};

// Field that always produces NaNs; integration must abort.
class BrokenField final : public TangentField {
 public:
  explicit BrokenField(Dims dims) : dims_(dims) {}
  Dims dims() const override { return dims_; }
  Mat eval(const Mat& u) const override {
    return Mat::Constant(u.rows(), u.cols(), std::nan(""));
  }
  Mat vjp(const Mat& u, const Mat& upstream) const override {
    return Mat::Constant(u.rows(), upstream.cols(), std::nan(""));
  }

 private:
  Dims dims_;
};

// Matrix exponential of a symmetric matrix via eigendecomposition.
inline Mat expm_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  return solver.eigenvectors() *
         solver.eigenvalues().array().exp().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

// init_field with a one-shot seeded generator.
inline FieldParams seeded_field(const FieldSpec& spec, const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_field(spec, dims, rng);
}

// Addresses of every parameter in declaration order: per layer, weight
// entries row-major, then bias entries.
inline std::vector<double*> parameter_addresses(FieldParams& params) {
  std::vector<double*> addresses;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Mat& w = params.weights[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index col = 0; col < w.cols(); ++col) addresses.push_back(&w(r, col));
    }
    Vec& b = params.biases[l];
    for (Index r = 0; r < b.size(); ++r) addresses.push_back(&b[r]);
  }
  return addresses;
}

inline std::vector<double> gradient_values(const GradientBuffer& grads) {
  std::vector<double> values;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    const Mat& w = grads.weights[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index col = 0; col < w.cols(); ++col) values.push_back(w(r, col));
    }
    const Vec& b = grads.biases[l];
    for (Index r = 0; r < b.size(); ++r) values.push_back(b[r]);
  }
  return values;
}

inline std::vector<TrainingTuple> random_tuple_batch(const Dims& dims, double eps,
                                                     Index batch_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> label(0, static_cast<int>(dims.c) - 1);
  std::vector<TrainingTuple> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  for (Index b = 0; b < batch_size; ++b) {
    Configuration beta(static_cast<std::size_t>(dims.n));
    for (auto& entry : beta) entry = label(rng);
    batch.push_back(make_training_tuple(beta, dims, eps, rng));
  }
  return batch;
}

// Max relative error between analytic rcfm gradients and central differences
// over a random subset of coordinates.
inline double rcfm_gradient_max_rel_error(FieldParams params,
                                          const std::vector<TrainingTuple>& batch,
                                          int n_coords, std::mt19937_64& rng,
                                          double h = 1e-6) {
  const LossResult analytic = rcfm_loss(params, batch);
  const std::vector<double> grad = gradient_values(analytic.grads);
  std::vector<double*> addresses = parameter_addresses(params);

  std::uniform_int_distribution<std::size_t> pick(0, addresses.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < n_coords; ++k) {
    const std::size_t idx = pick(rng);
    double* coord = addresses[idx];
    const double saved = *coord;
    *coord = saved + h;
    const double up = rcfm_loss(params, batch).loss;
    *coord = saved - h;
    const double down = rcfm_loss(params, batch).loss;
    *coord = saved;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad[idx]), 1e-8});
    worst = std::max(worst, std::abs(fd - grad[idx]) / scale);
  }
  return worst;
}

// Energy-distance two-sample statistic with a permutation threshold; returns
// true when the two samples are statistically indistinguishable.
inline bool energy_distance_indistinguishable(const std::vector<Vec>& a,
                                              const std::vector<Vec>& b, std::mt19937_64& rng,
                                              int permutations = 200) {
  auto statistic = [](const std::vector<const Vec*>& x, const std::vector<const Vec*>& y) {
    auto mean_cross = [](const std::vector<const Vec*>& u, const std::vector<const Vec*>& v) {
      double total = 0.0;
      for (const Vec* p : u) {
        for (const Vec* q : v) total += (*p - *q).norm();
      }
      return total / (static_cast<double>(u.size()) * static_cast<double>(v.size()));
    };
    return 2.0 * mean_cross(x, y) - mean_cross(x, x) - mean_cross(y, y);
  };

  std::vector<const Vec*> xs;
  std::vector<const Vec*> pooled;
  for (const Vec& v : a) pooled.push_back(&v);
  const std::size_t split = pooled.size();
  for (const Vec& v : b) pooled.push_back(&v);

  std::vector<const Vec*> x(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(split));
  std::vector<const Vec*> y(pooled.begin() + static_cast<std::ptrdiff_t>(split), pooled.end());
  const double observed = statistic(x, y);

  int exceed = 0;
  std::vector<const Vec*> shuffled = pooled;
  for (int rep = 0; rep < permutations; ++rep) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<const Vec*> px(shuffled.begin(),
                               shuffled.begin() + static_cast<std::ptrdiff_t>(split));
    std::vector<const Vec*> py(shuffled.begin() + static_cast<std::ptrdiff_t>(split),
                               shuffled.end());
    if (statistic(px, py) >= observed) ++exceed;
  }
  // Indistinguishable when the observed statistic is not in the upper tail.
  return (exceed + 1) >= permutations / 100;
}

}  // namespace testsupport
