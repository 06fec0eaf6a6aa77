#pragma once

#include "assignflow/common.hpp"

namespace assignflow {

// Entries of simplex points are clamped to this floor and renormalized after
// every map, so centered log-ratios stay finite near the boundary.
inline constexpr double kPositivityFloor = 1e-14;

// ---- single-simplex operations on length-c vectors ----

// R_p[f] = Diag(p) f - <p, f> p.  The output sums to zero for any ambient f.
Vec replicator(const Vec& p, const Vec& f);

// exp_e(p, v) = p .* exp(v) / <p, exp(v)>, evaluated as a softmax of
// log(p) + v with max subtraction.
Vec exp_e(const Vec& p, const Vec& v);

// Inverse of exp_e: the centered log-ratio log(q ./ p) - mean(log(q ./ p)).
Vec log_e(const Vec& p, const Vec& q);

// Exponential map of the e-connection, Exp_p(v) = p .* e^{v ./ p} normalized.
// Satisfies exp_e(p, f) = exp_map(p, replicator(p, f)).
Vec exp_map(const Vec& p, const Vec& v);

// ---- row-wise operations on n x c states ----

Mat barycenter_state(const Dims& dims);
Mat center_rows(const Mat& a);  // orthogonal projection onto T0, per row
Mat replicator_rows(const Mat& w, const Mat& a);
Mat exp_e_rows(const Mat& w, const Mat& v);
Mat log_e_rows(const Mat& w, const Mat& q);
Mat softmax_rows(const Mat& u);  // exp_e from the barycenter

// Point of the e-geodesic from exp_e(bary, u0) to exp_e(bary, u_target) at
// time t in [0, 1]; the endpoints are returned without roundoff.
Mat geodesic_point(const Mat& u0, const Mat& u_target, double t);

// Time derivative of the geodesic above at the point w_t.
Mat geodesic_velocity(const Mat& w_t, const Mat& u0, const Mat& u_target);

// Sum over rows of <u_i, Diag(w_i)^{-1} u_i>.
double fisher_norm_sq(const Mat& w, const Mat& u);

// Fisher-Rao norm of the replicator push of an ambient vector:
// sum_i (<a_i, w_i .* a_i> - <w_i, a_i>^2), clamped at zero.
double pushed_norm_sq(const Mat& w, const Mat& a);

// q_beta = eps * barycenter + (1 - eps) * one_hot(beta), row-wise.
Mat smoothed_corner(const Configuration& beta, const Dims& dims, double eps);

// ---- flattened batched forms ----
// A flattened state stores row i of the n x c matrix at entries
// [i*c, (i+1)*c); batched variants hold one flattened state per column.

Vec flatten(const Mat& w);
Mat unflatten(const Vec& x, const Dims& dims);

Mat softmax_rows_flat(const Mat& u, const Dims& dims);
Mat center_rows_flat(const Mat& a, const Dims& dims);
Mat replicator_rows_flat(const Mat& w, const Mat& a, const Dims& dims);
Vec pushed_norm_sq_flat(const Mat& w, const Mat& a, const Dims& dims);  // per column

bool is_assignment_state(const Mat& w, double tol = 1e-10);
bool is_tangent_state(const Mat& u, double tol = 1e-10);

}  // namespace assignflow
