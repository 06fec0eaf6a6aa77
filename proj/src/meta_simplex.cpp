#include "assignflow/meta_simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace assignflow {

std::int64_t joint_size(const Dims& dims) {
  check_dims(dims);
  std::int64_t size = 1;
  for (Index i = 0; i < dims.n; ++i) {
    if (size > kDenseBudget / dims.c) {
      throw DimsError("joint_size: c^n exceeds the dense budget of 2^24 configurations");
    }
    size *= dims.c;
  }
  return size;
}

std::int64_t config_to_index(const Configuration& config, const Dims& dims) {
  check_configuration(config, dims);
  joint_size(dims);
  std::int64_t index = 0;
  for (Index i = 0; i < dims.n; ++i) {
    index = index * dims.c + config[static_cast<std::size_t>(i)];
  }
  return index;
}

Configuration index_to_config(std::int64_t index, const Dims& dims) {
  const std::int64_t size = joint_size(dims);
  if (index < 0 || index >= size) {
    throw std::invalid_argument("index_to_config: index out of range");
  }
  Configuration config(static_cast<std::size_t>(dims.n));
  for (Index i = dims.n; i-- > 0;) {
    config[static_cast<std::size_t>(i)] = static_cast<int>(index % dims.c);
    index /= dims.c;
  }
  return config;
}

Vec embed(const Mat& w, const Dims& dims) {
  check_dims(dims);
  if (w.rows() != dims.n || w.cols() != dims.c) {
    throw DimsError("embed: state shape mismatch");
  }
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw std::invalid_argument("embed: entries must be finite and nonnegative");
  }
  if (((w.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) {
    throw std::invalid_argument("embed: rows must sum to 1");
  }
  joint_size(dims);
  Vec out = Vec::Ones(1);
  for (Index i = 0; i < dims.n; ++i) {
    Vec next(out.size() * dims.c);
    for (Index a = 0; a < out.size(); ++a) {
      next.segment(a * dims.c, dims.c) = out[a] * w.row(i).transpose();
    }
    out.swap(next);
  }
  return out;
}

Mat marginalize(const Vec& p, const Dims& dims) {
  const std::int64_t size = joint_size(dims);
  if (p.size() != size) {
    throw DimsError("marginalize: joint has wrong length");
  }
  Mat m = Mat::Zero(dims.n, dims.c);
  Configuration digits(static_cast<std::size_t>(dims.n), 0);
  for (std::int64_t a = 0; a < size; ++a) {
    for (Index i = 0; i < dims.n; ++i) {
      m(i, digits[static_cast<std::size_t>(i)]) += p[a];
    }
    for (Index i = dims.n; i-- > 0;) {
      auto& d = digits[static_cast<std::size_t>(i)];
      if (++d < dims.c) break;
      d = 0;
    }
  }
  return m;
}

double entropy(const Vec& p) {
  if (!p.allFinite()) {
    throw std::invalid_argument("entropy: non-finite entries");
  }
  double h = 0.0;
  for (Index a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) h -= p[a] * std::log(p[a]);
  }
  return h;
}

Vec empirical_joint(const std::vector<Configuration>& samples, const Dims& dims) {
  const std::int64_t size = joint_size(dims);
  if (samples.empty()) {
    throw std::invalid_argument("empirical_joint: no samples");
  }
  Vec counts = Vec::Zero(size);
  for (const auto& config : samples) {
    counts[config_to_index(config, dims)] += 1.0;
  }
  return counts / static_cast<double>(samples.size());
}

double tv_distance(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) {
    throw DimsError("tv_distance: length mismatch");
  }
  return 0.5 * (p - q).lpNorm<1>();
}

}  // namespace assignflow
