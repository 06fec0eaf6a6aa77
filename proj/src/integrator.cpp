#include "assignflow/integrator.hpp"

#include "assignflow/flow_matching.hpp"
#include "assignflow/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace assignflow {

LiftedField::LiftedField(const FieldParams& params) : params_(&params) {
  check_dims(params.dims);
}

Dims LiftedField::dims() const { return params_->dims; }

Mat LiftedField::eval(const Mat& u) const {
  const Dims d = params_->dims;
  Mat w = softmax_rows_flat(u, d);
  return center_rows_flat(field_forward(*params_, w), d);
}

Mat LiftedField::vjp(const Mat& u, const Mat& upstream) const {
  const Dims d = params_->dims;
  Mat w = softmax_rows_flat(u, d);
  ForwardCache cache;
  field_forward(*params_, w, &cache);
  // Centering is self-adjoint and the softmax Jacobian equals the replicator
  // at the image point, so the pullback is R_w[ dF^T Pi0 g ].
  Mat g_w = field_backward(*params_, cache, center_rows_flat(upstream, d), nullptr);
  return replicator_rows_flat(w, g_w, d);
}

Mat lifted_rhs(const FieldParams& params, const Mat& u) {
  if (u.rows() != params.dims.n || u.cols() != params.dims.c) {
    throw DimsError("lifted_rhs: state shape mismatch");
  }
  LiftedField field(params);
  return unflatten(field.eval(flatten(u)), params.dims);
}

Mat integrate(const TangentField& field, const Mat& u_start, double t0, double t1,
              const IntegratorConfig& config, Trajectory* trajectory) {
  if (config.steps < 1) {
    throw std::invalid_argument("integrate: step count must be >= 1");
  }
  if (t0 == t1) {
    throw std::domain_error("integrate: empty time interval");
  }
  if (u_start.rows() != field.dims().state_size()) {
    throw DimsError("integrate: state rows do not match the field dims");
  }
  if (!u_start.allFinite()) {
    throw std::invalid_argument("integrate: non-finite initial state");
  }

  const double dt = (t1 - t0) / static_cast<double>(config.steps);
  Mat u = u_start;
  if (trajectory) {
    trajectory->t.clear();
    trajectory->u.clear();
    trajectory->t.push_back(t0);
    trajectory->u.push_back(u);
  }
  for (Index step = 0; step < config.steps; ++step) {
    if (config.scheme == OdeScheme::Rk4) {
      Mat k1 = field.eval(u);
      Mat k2 = field.eval(u + (0.5 * dt) * k1);
      Mat k3 = field.eval(u + (0.5 * dt) * k2);
      Mat k4 = field.eval(u + dt * k3);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      u += dt * field.eval(u);
    }
    if (!u.allFinite()) {
      throw NumericError("integrate: non-finite state after step " + std::to_string(step + 1));
    }
    if (trajectory) {
      trajectory->t.push_back(t0 + static_cast<double>(step + 1) * dt);
      trajectory->u.push_back(u);
    }
  }
  return u;
}

Configuration round_to_configuration(const Mat& w, SampleStats* stats) {
  if (w.rows() < 1 || w.cols() < 2) {
    throw DimsError("round_to_configuration: expected an n x c state");
  }
  Configuration config(static_cast<std::size_t>(w.rows()));
  for (Index i = 0; i < w.rows(); ++i) {
    Index best = 0;
    double best_value = w(i, 0);
    Index hits = 1;
    for (Index j = 1; j < w.cols(); ++j) {
      if (w(i, j) > best_value) {
        best = j;
        best_value = w(i, j);
        hits = 1;
      } else if (w(i, j) == best_value) {
        ++hits;
      }
    }
    if (hits > 1 && stats) stats->argmax_ties += 1;
    config[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return config;
}

std::vector<Configuration> sample_configurations(const FieldParams& params, Index count,
                                                 std::mt19937_64& rng,
                                                 const IntegratorConfig& config,
                                                 SampleStats* stats) {
  if (count < 1) {
    throw std::invalid_argument("sample_configurations: count must be >= 1");
  }
  const Dims dims = params.dims;
  const Index nc = dims.state_size();
  LiftedField field(params);

  std::vector<Configuration> samples;
  samples.reserve(static_cast<std::size_t>(count));

  const Index chunk_max = 4096;
  Index done = 0;
  while (done < count) {
    const Index chunk = std::min(chunk_max, count - done);
    Mat u0(nc, chunk);
    for (Index b = 0; b < chunk; ++b) {
      u0.col(b) = flatten(sample_reference(rng, dims));
    }
    Mat u1 = integrate(field, u0, 0.0, 1.0, config);
    Mat w1 = softmax_rows_flat(u1, dims);
    for (Index b = 0; b < chunk; ++b) {
      samples.push_back(round_to_configuration(unflatten(w1.col(b), dims), stats));
    }
    done += chunk;
  }
  return samples;
}

}  // namespace assignflow
