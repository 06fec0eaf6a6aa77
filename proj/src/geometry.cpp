#include "assignflow/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace assignflow {

namespace {

void require_finite(const Mat& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

void require_simplex(const Mat& w, const char* what) {
  require_finite(w, what);
  if ((w.array() <= 0.0).any()) {
    throw std::invalid_argument(std::string(what) + ": simplex entries must be positive");
  }
  if (((w.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) {
    throw std::invalid_argument(std::string(what) + ": rows must sum to 1");
  }
}

void require_simplex_vec(const Vec& p, const char* what) {
  require_finite(p, what);
  if ((p.array() <= 0.0).any()) {
    throw std::invalid_argument(std::string(what) + ": simplex entries must be positive");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimsError(std::string(what) + ": shape mismatch");
  }
}

// Renormalize each row, then clamp to the positivity floor; rows may exceed
// unit mass by at most c * kPositivityFloor.
void refloor_rows(Mat& w) {
  w.array().colwise() /= w.rowwise().sum().array();
  w = w.cwiseMax(kPositivityFloor);
}

}  // namespace

Vec replicator(const Vec& p, const Vec& f) {
  require_same_shape(p, f, "replicator");
  require_finite(p, "replicator");
  require_finite(f, "replicator");
  return p.cwiseProduct(f) - p.dot(f) * p;
}

Vec exp_e(const Vec& p, const Vec& v) {
  require_simplex_vec(p, "exp_e");
  require_same_shape(p, v, "exp_e");
  require_finite(v, "exp_e");
  Vec z = p.array().log().matrix() + v;
  z.array() -= z.maxCoeff();
  Vec w = z.array().exp();
  w /= w.sum();
  w = w.cwiseMax(kPositivityFloor);
  return w;
}

Vec log_e(const Vec& p, const Vec& q) {
  require_simplex_vec(p, "log_e");
  require_same_shape(p, q, "log_e");
  require_finite(q, "log_e");
  if ((q.array() < kPositivityFloor).any()) {
    throw std::domain_error("log_e: point has entries below the positivity floor");
  }
  Vec r = (q.array() / p.array()).log();
  return r.array() - r.mean();
}

Vec exp_map(const Vec& p, const Vec& v) {
  require_simplex_vec(p, "exp_map");
  require_same_shape(p, v, "exp_map");
  require_finite(v, "exp_map");
  Vec z = p.array().log() + v.array() / p.array();
  z.array() -= z.maxCoeff();
  Vec w = z.array().exp();
  w /= w.sum();
  w = w.cwiseMax(kPositivityFloor);
  return w;
}

Mat barycenter_state(const Dims& dims) {
  check_dims(dims);
  return Mat::Constant(dims.n, dims.c, 1.0 / static_cast<double>(dims.c));
}

Mat center_rows(const Mat& a) {
  require_finite(a, "center_rows");
  return a.colwise() - a.rowwise().mean();
}

Mat replicator_rows(const Mat& w, const Mat& a) {
  require_same_shape(w, a, "replicator_rows");
  require_finite(w, "replicator_rows");
  require_finite(a, "replicator_rows");
  Mat wa = w.cwiseProduct(a);
  Vec dots = wa.rowwise().sum();
  return wa - w.cwiseProduct(dots.replicate(1, w.cols()));
}

Mat exp_e_rows(const Mat& w, const Mat& v) {
  require_simplex(w, "exp_e_rows");
  require_same_shape(w, v, "exp_e_rows");
  require_finite(v, "exp_e_rows");
  Mat z = w.array().log().matrix() + v;
  Mat out(w.rows(), w.cols());
  for (Index i = 0; i < w.rows(); ++i) {
    Eigen::RowVectorXd row = z.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
    out.row(i) = row;
  }
  refloor_rows(out);
  return out;
}

Mat log_e_rows(const Mat& w, const Mat& q) {
  require_simplex(w, "log_e_rows");
  require_same_shape(w, q, "log_e_rows");
  require_finite(q, "log_e_rows");
  if ((q.array() < kPositivityFloor).any()) {
    throw std::domain_error("log_e_rows: point has entries below the positivity floor");
  }
  Mat r = (q.array() / w.array()).log();
  return r.colwise() - r.rowwise().mean();
}

Mat softmax_rows(const Mat& u) {
  require_finite(u, "softmax_rows");
  Mat out(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    Eigen::RowVectorXd row = u.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
    out.row(i) = row;
  }
  refloor_rows(out);
  return out;
}

Mat geodesic_point(const Mat& u0, const Mat& u_target, double t) {
  require_same_shape(u0, u_target, "geodesic_point");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("geodesic_point: t must lie in [0, 1]");
  }
  if (t == 0.0) return softmax_rows(u0);
  if (t == 1.0) return softmax_rows(u_target);
  return softmax_rows(u0 + t * (u_target - u0));
}

Mat geodesic_velocity(const Mat& w_t, const Mat& u0, const Mat& u_target) {
  return replicator_rows(w_t, u_target - u0);
}

double fisher_norm_sq(const Mat& w, const Mat& u) {
  require_simplex(w, "fisher_norm_sq");
  require_same_shape(w, u, "fisher_norm_sq");
  require_finite(u, "fisher_norm_sq");
  return (u.array().square() / w.array()).sum();
}

double pushed_norm_sq(const Mat& w, const Mat& a) {
  require_simplex(w, "pushed_norm_sq");
  require_same_shape(w, a, "pushed_norm_sq");
  require_finite(a, "pushed_norm_sq");
  Mat wa = w.cwiseProduct(a);
  double s1 = wa.cwiseProduct(a).sum();
  double s2 = wa.rowwise().sum().squaredNorm();
  return std::max(0.0, s1 - s2);
}

Mat smoothed_corner(const Configuration& beta, const Dims& dims, double eps) {
  check_configuration(beta, dims);
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::domain_error("smoothed_corner: eps must lie in (0, 1)");
  }
  Mat q = Mat::Constant(dims.n, dims.c, eps / static_cast<double>(dims.c));
  for (Index i = 0; i < dims.n; ++i) {
    q(i, beta[static_cast<std::size_t>(i)]) += 1.0 - eps;
  }
  return q;
}

Vec flatten(const Mat& w) {
  Vec x(w.size());
  Index pos = 0;
  for (Index i = 0; i < w.rows(); ++i) {
    x.segment(pos, w.cols()) = w.row(i).transpose();
    pos += w.cols();
  }
  return x;
}

Mat unflatten(const Vec& x, const Dims& dims) {
  check_dims(dims);
  if (x.size() != dims.state_size()) {
    throw DimsError("unflatten: size mismatch");
  }
  Mat w(dims.n, dims.c);
  for (Index i = 0; i < dims.n; ++i) {
    w.row(i) = x.segment(i * dims.c, dims.c).transpose();
  }
  return w;
}

Mat softmax_rows_flat(const Mat& u, const Dims& dims) {
  check_dims(dims);
  if (u.rows() != dims.state_size()) {
    throw DimsError("softmax_rows_flat: row count mismatch");
  }
  Mat w(u.rows(), u.cols());
  for (Index i = 0; i < dims.n; ++i) {
    auto block = u.middleRows(i * dims.c, dims.c);
    Mat z = block.rowwise() - block.colwise().maxCoeff();
    z = z.array().exp();
    Eigen::RowVectorXd sums = z.colwise().sum();
    z.array().rowwise() /= sums.array();
    z = z.cwiseMax(kPositivityFloor);
    w.middleRows(i * dims.c, dims.c) = z;
  }
  return w;
}

Mat center_rows_flat(const Mat& a, const Dims& dims) {
  check_dims(dims);
  if (a.rows() != dims.state_size()) {
    throw DimsError("center_rows_flat: row count mismatch");
  }
  Mat out(a.rows(), a.cols());
  const double inv_c = 1.0 / static_cast<double>(dims.c);
  for (Index i = 0; i < dims.n; ++i) {
    auto block = a.middleRows(i * dims.c, dims.c);
    Eigen::RowVectorXd means = block.colwise().sum() * inv_c;
    out.middleRows(i * dims.c, dims.c) = block.rowwise() - means;
  }
  return out;
}

Mat replicator_rows_flat(const Mat& w, const Mat& a, const Dims& dims) {
  check_dims(dims);
  require_same_shape(w, a, "replicator_rows_flat");
  if (w.rows() != dims.state_size()) {
    throw DimsError("replicator_rows_flat: row count mismatch");
  }
  Mat wa = w.cwiseProduct(a);
  Mat out(w.rows(), w.cols());
  for (Index i = 0; i < dims.n; ++i) {
    auto wa_block = wa.middleRows(i * dims.c, dims.c);
    auto w_block = w.middleRows(i * dims.c, dims.c);
    Eigen::RowVectorXd dots = wa_block.colwise().sum();
    out.middleRows(i * dims.c, dims.c) =
        wa_block - w_block.cwiseProduct(dots.replicate(dims.c, 1));
  }
  return out;
}

Vec pushed_norm_sq_flat(const Mat& w, const Mat& a, const Dims& dims) {
  check_dims(dims);
  require_same_shape(w, a, "pushed_norm_sq_flat");
  if (w.rows() != dims.state_size()) {
    throw DimsError("pushed_norm_sq_flat: row count mismatch");
  }
  Mat wa = w.cwiseProduct(a);
  Vec acc = Vec::Zero(w.cols());
  for (Index i = 0; i < dims.n; ++i) {
    auto wa_block = wa.middleRows(i * dims.c, dims.c);
    auto a_block = a.middleRows(i * dims.c, dims.c);
    Eigen::RowVectorXd s1 = wa_block.cwiseProduct(a_block).colwise().sum();
    Eigen::RowVectorXd s2 = wa_block.colwise().sum();
    acc += (s1.array() - s2.array().square()).matrix().transpose();
  }
  return acc.cwiseMax(0.0);
}

bool is_assignment_state(const Mat& w, double tol) {
  if (!w.allFinite()) return false;
  if ((w.array() <= 0.0).any()) return false;
  return ((w.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

bool is_tangent_state(const Mat& u, double tol) {
  if (!u.allFinite()) return false;
  return (u.rowwise().sum().array().abs() <= tol).all();
}

}  // namespace assignflow
