#include "assignflow/field.hpp"

#include "assignflow/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace assignflow {

namespace {

void check_layer_count(const FieldParams& params) {
  const std::size_t layers = params.layer_sizes.size();
  if (layers < 2 || params.weights.size() != layers - 1 || params.biases.size() != layers - 1) {
    throw std::invalid_argument("field params: inconsistent layer bookkeeping");
  }
}

void check_buffer(const FieldParams& params, const GradientBuffer& buffer, const char* what) {
  if (buffer.weights.size() != params.weights.size() ||
      buffer.biases.size() != params.biases.size()) {
    throw std::invalid_argument(std::string(what) + ": buffer/params layer mismatch");
  }
  for (std::size_t l = 0; l < buffer.weights.size(); ++l) {
    if (buffer.weights[l].rows() != params.weights[l].rows() ||
        buffer.weights[l].cols() != params.weights[l].cols() ||
        buffer.biases[l].size() != params.biases[l].size()) {
      throw std::invalid_argument(std::string(what) + ": buffer/params shape mismatch");
    }
  }
}

}  // namespace

Index FieldParams::param_count() const {
  Index count = 0;
  for (const auto& w : weights) count += w.size();
  for (const auto& b : biases) count += b.size();
  return count;
}

bool FieldParams::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (b.size() > 0 && !b.allFinite()) return false;
  }
  return true;
}

void GradientBuffer::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

bool GradientBuffer::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (b.size() > 0 && !b.allFinite()) return false;
  }
  return true;
}

GradientBuffer make_gradient_buffer(const FieldParams& params) {
  GradientBuffer buffer;
  for (const auto& w : params.weights) buffer.weights.push_back(Mat::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases) buffer.biases.push_back(Vec::Zero(b.size()));
  return buffer;
}

FieldParams init_field(const FieldSpec& spec, const Dims& dims, std::mt19937_64& rng) {
  check_dims(dims);
  if (spec.kind == FieldKind::Linear && !spec.hidden.empty()) {
    throw std::invalid_argument("init_field: the linear variant takes no hidden layers");
  }
  for (Index h : spec.hidden) {
    if (h < 1) throw std::invalid_argument("init_field: hidden widths must be positive");
  }

  FieldParams params;
  params.kind = spec.kind;
  params.dims = dims;
  params.bias = (spec.kind == FieldKind::Linear) ? spec.bias : true;

  const Index nc = dims.state_size();
  params.layer_sizes.push_back(nc);
  if (spec.kind == FieldKind::Mlp) {
    for (Index h : spec.hidden) params.layer_sizes.push_back(h);
  }
  params.layer_sizes.push_back(nc);

  for (std::size_t l = 0; l + 1 < params.layer_sizes.size(); ++l) {
    const Index fan_in = params.layer_sizes[l];
    const Index fan_out = params.layer_sizes[l + 1];
    Mat w = Mat::Zero(fan_out, fan_in);
    if (spec.kind == FieldKind::Mlp) {
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      for (Index r = 0; r < fan_out; ++r) {
        for (Index col = 0; col < fan_in; ++col) {
          w(r, col) = uniform(rng);
        }
      }
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(params.bias ? Vec::Zero(fan_out) : Vec());
  }
  return params;
}

Mat field_forward(const FieldParams& params, const Mat& x, ForwardCache* cache) {
  check_layer_count(params);
  if (x.rows() != params.dims.state_size()) {
    throw std::invalid_argument("field_forward: state rows do not match dims");
  }
  if (cache) {
    cache->input = x;
    cache->hidden.clear();
  }
  const std::size_t layers = params.weights.size();
  Mat a = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Mat z = params.weights[l] * a;
    if (params.biases[l].size() > 0) z.colwise() += params.biases[l];
    if (l + 1 < layers) {
      z = z.cwiseMax(0.0);
      if (cache) cache->hidden.push_back(z);
      a = std::move(z);
    } else {
      return z;
    }
  }
  return a;  // unreachable; layers >= 1
}

Mat field_eval(const FieldParams& params, const Mat& w) {
  if (w.rows() != params.dims.n || w.cols() != params.dims.c) {
    throw std::invalid_argument("field_eval: state shape does not match dims");
  }
  Vec out = field_forward(params, flatten(w));
  return unflatten(out, params.dims);
}

Mat field_backward(const FieldParams& params, const ForwardCache& cache, const Mat& upstream,
                   GradientBuffer* grads) {
  check_layer_count(params);
  const std::size_t layers = params.weights.size();
  if (cache.hidden.size() != layers - 1) {
    throw std::invalid_argument("field_backward: cache does not match params");
  }
  if (upstream.rows() != params.dims.state_size() || upstream.cols() != cache.input.cols()) {
    throw std::invalid_argument("field_backward: upstream shape mismatch");
  }
  if (grads) check_buffer(params, *grads, "field_backward");

  Mat g = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const Mat& a_in = (l == 0) ? cache.input : cache.hidden[l - 1];
    if (grads) {
      grads->weights[l] += g * a_in.transpose();
      if (params.biases[l].size() > 0) grads->biases[l] += g.rowwise().sum();
    }
    Mat g_in = params.weights[l].transpose() * g;
    if (l > 0) {
      g_in = g_in.cwiseProduct((cache.hidden[l - 1].array() > 0.0).cast<double>().matrix());
    }
    g = std::move(g_in);
  }
  return g;
}

AdamState make_adam_state(const FieldParams& params, double lr) {
  if (!(lr > 0.0)) {
    throw std::invalid_argument("make_adam_state: learning rate must be positive");
  }
  AdamState state;
  state.lr = lr;
  state.m = make_gradient_buffer(params);
  state.v = make_gradient_buffer(params);
  return state;
}

void adam_step(FieldParams& params, const GradientBuffer& grads, AdamState& state,
               double lr_scale) {
  check_buffer(params, grads, "adam_step");
  check_buffer(params, state.m, "adam_step");
  if (!grads.all_finite()) {
    throw NumericError("adam_step: non-finite gradient, step aborted");
  }
  state.step += 1;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double rate = state.lr * lr_scale;

  auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    theta.array() -=
        rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.eps);
  };

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    if (params.biases[l].size() > 0) {
      update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
    }
  }
}

}  // namespace assignflow
