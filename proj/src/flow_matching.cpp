#include "assignflow/flow_matching.hpp"

#include "assignflow/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace assignflow {

Mat sample_reference(std::mt19937_64& rng, const Dims& dims) {
  check_dims(dims);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat u(dims.n, dims.c);
  for (Index i = 0; i < dims.n; ++i) {
    for (Index j = 0; j < dims.c; ++j) {
      u(i, j) = normal(rng);
    }
    u.row(i).array() -= u.row(i).mean();
  }
  return u;
}

TrainingTuple make_training_tuple_at(const Configuration& beta, const Dims& dims, double eps,
                                     double t, Mat u0) {
  check_configuration(beta, dims);
  if (u0.rows() != dims.n || u0.cols() != dims.c) {
    throw DimsError("make_training_tuple_at: u0 shape mismatch");
  }
  TrainingTuple tuple;
  tuple.t = t;
  tuple.u_beta = log_e_rows(barycenter_state(dims), smoothed_corner(beta, dims, eps));
  tuple.w_t = geodesic_point(u0, tuple.u_beta, t);
  tuple.u0 = std::move(u0);
  return tuple;
}

TrainingTuple make_training_tuple(const Configuration& beta, const Dims& dims, double eps,
                                  std::mt19937_64& rng) {
  // Draw order is part of the determinism contract: t first, then u0.
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double t = uniform(rng);
  return make_training_tuple_at(beta, dims, eps, t, sample_reference(rng, dims));
}

LossResult rcfm_loss(const FieldParams& params, const std::vector<TrainingTuple>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("rcfm_loss: empty batch");
  }
  const Dims dims = params.dims;
  const Index nc = dims.state_size();
  const Index b_size = static_cast<Index>(batch.size());

  Mat x(nc, b_size);
  Mat d(nc, b_size);
  for (Index b = 0; b < b_size; ++b) {
    const TrainingTuple& tuple = batch[static_cast<std::size_t>(b)];
    x.col(b) = flatten(tuple.w_t);
    d.col(b) = flatten(tuple.u_beta - tuple.u0);
  }

  ForwardCache cache;
  Mat y = field_forward(params, x, &cache);
  Mat residual = y - d;
  Vec per_tuple = pushed_norm_sq_flat(x, residual, dims);
  if (!per_tuple.allFinite()) {
    Index bad = 0;
    while (bad < b_size && std::isfinite(per_tuple[bad])) ++bad;
    throw NumericError("rcfm_loss: non-finite loss at tuple " + std::to_string(bad));
  }

  LossResult result;
  result.loss = per_tuple.mean();
  result.grads = make_gradient_buffer(params);
  Mat upstream =
      (2.0 / static_cast<double>(b_size)) * replicator_rows_flat(x, residual, dims);
  field_backward(params, cache, upstream, &result.grads);
  return result;
}

BetaSampler make_empirical_sampler(std::vector<Configuration> dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("make_empirical_sampler: empty dataset");
  }
  return [data = std::move(dataset)](std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    return data[pick(rng)];
  };
}

TrainResult train(const BetaSampler& sample_beta, const Dims& dims, const TrainConfig& config) {
  check_dims(dims);
  if (config.batch < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (config.steps < 0) throw std::invalid_argument("train: step count must be >= 0");
  if (!(config.eps > 0.0 && config.eps < 1.0)) {
    throw std::domain_error("train: eps must lie in (0, 1)");
  }
  if (!(config.lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");

  std::mt19937_64 rng(config.seed);
  FieldParams params = init_field(config.field, dims, rng);
  AdamState adam = make_adam_state(params, config.lr);

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.steps));
  std::vector<TrainingTuple> batch;
  batch.reserve(static_cast<std::size_t>(config.batch));

  for (Index step = 0; step < config.steps; ++step) {
    batch.clear();
    for (Index b = 0; b < config.batch; ++b) {
      Configuration beta = sample_beta(rng);
      batch.push_back(make_training_tuple(beta, dims, config.eps, rng));
    }
    LossResult loss = rcfm_loss(params, batch);
    double scale = 1.0;
    if (config.schedule == LrSchedule::Cosine) {
      scale = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                                    static_cast<double>(config.steps)));
    }
    adam_step(params, loss.grads, adam, scale);
    result.loss_trace.push_back(loss.loss);
  }

  result.params = std::move(params);
  return result;
}

}  // namespace assignflow
