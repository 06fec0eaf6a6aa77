#pragma once

#include "assignflow/common.hpp"

#include <random>
#include <vector>

namespace assignflow {

enum class FieldKind { Linear, Mlp };

struct FieldSpec {
  FieldKind kind = FieldKind::Linear;
  std::vector<Index> hidden;  // Mlp hidden widths; must be empty for Linear
  bool bias = false;          // Linear bias toggle; Mlp layers always carry biases
};

// Parameters of the fitness function F_theta: R^{nc} -> R^{nc} applied to
// flattened assignment states.  Linear starts at zero (stationary flow); Mlp
// uses He-uniform weights and zero biases.
struct FieldParams {
  FieldKind kind = FieldKind::Linear;
  Dims dims;
  bool bias = false;
  std::vector<Index> layer_sizes;  // [nc, hidden..., nc]
  std::vector<Mat> weights;        // layer l: layer_sizes[l+1] x layer_sizes[l]
  std::vector<Vec> biases;         // empty vectors when the layer has no bias

  Index param_count() const;
  bool all_finite() const;
};

struct GradientBuffer {
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  void set_zero();
  bool all_finite() const;
};

GradientBuffer make_gradient_buffer(const FieldParams& params);

struct ForwardCache {
  Mat input;                // nc x B
  std::vector<Mat> hidden;  // post-ReLU activations per hidden layer
};

FieldParams init_field(const FieldSpec& spec, const Dims& dims, std::mt19937_64& rng);

// Batched forward pass; each column of x is a flattened state.  The cache,
// when requested, is sufficient for the backward pass.
Mat field_forward(const FieldParams& params, const Mat& x, ForwardCache* cache = nullptr);

// Single-state convenience form (n x c in, n x c out).
Mat field_eval(const FieldParams& params, const Mat& w);

// Reverse mode: upstream is d(loss)/d(output) with the forward output's
// shape; returns d(loss)/d(input) and accumulates parameter gradients into
// grads when non-null.
Mat field_backward(const FieldParams& params, const ForwardCache& cache, const Mat& upstream,
                   GradientBuffer* grads);

struct AdamState {
  long step = 0;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  GradientBuffer m;
  GradientBuffer v;
};

AdamState make_adam_state(const FieldParams& params, double lr = 5e-4);

// Bias-corrected Adam update; lr_scale multiplies the stored rate (hook for
// schedules).  Non-finite gradients abort before any state is touched.
void adam_step(FieldParams& params, const GradientBuffer& grads, AdamState& state,
               double lr_scale = 1.0);

}  // namespace assignflow
