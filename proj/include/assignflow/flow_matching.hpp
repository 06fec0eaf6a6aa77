#pragma once

#include "assignflow/common.hpp"
#include "assignflow/field.hpp"

#include <functional>
#include <random>
#include <vector>

namespace assignflow {

enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  double eps = 0.01;
  Index batch = 512;
  Index steps = 2000;
  double lr = 5e-4;
  LrSchedule schedule = LrSchedule::Constant;
  std::uint64_t seed = 0;
  FieldSpec field;
};

// One conditional flow-matching tuple: w_t lies on the e-geodesic from
// softmax(u0) to the smoothed corner of beta, and u_beta - u0 is the
// tangent-coordinate velocity of that geodesic.
struct TrainingTuple {
  double t = 0.0;
  Mat u0;      // n x c reference tangent
  Mat u_beta;  // n x c target tangent
  Mat w_t;     // geodesic point at t
};

// Row-wise standard normals projected onto T0 by mean subtraction.
Mat sample_reference(std::mt19937_64& rng, const Dims& dims);

// Deterministic core at explicit (t, u0).
TrainingTuple make_training_tuple_at(const Configuration& beta, const Dims& dims, double eps,
                                     double t, Mat u0);

// Random tuple: draws t ~ U[0,1) first, then u0 from the reference.
TrainingTuple make_training_tuple(const Configuration& beta, const Dims& dims, double eps,
                                  std::mt19937_64& rng);

struct LossResult {
  double loss = 0.0;
  GradientBuffer grads;
};

// Mean over the batch of |R_{w_t}[F(w_t) - (u_beta - u0)]|^2_{w_t} with
// parameter gradients.
LossResult rcfm_loss(const FieldParams& params, const std::vector<TrainingTuple>& batch);

using BetaSampler = std::function<Configuration(std::mt19937_64&)>;

// Uniform resampling with replacement from a nonempty dataset.
BetaSampler make_empirical_sampler(std::vector<Configuration> dataset);

struct TrainResult {
  FieldParams params;
  std::vector<double> loss_trace;
};

TrainResult train(const BetaSampler& sample_beta, const Dims& dims, const TrainConfig& config);

}  // namespace assignflow
