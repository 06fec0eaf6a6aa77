#include "doctest.h"

#include "assignflow/field.hpp"
#include "assignflow/flow_matching.hpp"
#include "assignflow/geometry.hpp"
#include "assignflow/integrator.hpp"

#include "support.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

using namespace assignflow;
using namespace testsupport;

namespace {

Mat tangent_state_from(std::mt19937_64& rng, const Dims& dims, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat u(dims.n, dims.c);
  for (Index i = 0; i < dims.n; ++i) {
    for (Index j = 0; j < dims.c; ++j) u(i, j) = normal(rng);
  }
  return center_rows(u);
}

}  // namespace

TEST_CASE("lifted_rhs: zero parameters give the zero field") {
  const Dims dims{2, 3};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Linear, {}, false}, dims, 1);
  Mat u = Mat::Zero(dims.n, dims.c);
  u << 0.3, -0.1, -0.2, 0.0, 0.5, -0.5;
  CHECK(lifted_rhs(params, u).isZero(0.0));
}

TEST_CASE("lifted_rhs: constant ambient field projects onto tangent rows") {
  const Dims dims{2, 3};
  Mat a(dims.n, dims.c);
  a << 0.4, -0.1, -0.3, -0.2, 0.2, 0.0;

  FieldParams params = seeded_field(FieldSpec{FieldKind::Linear, {}, true}, dims, 1);
  params.biases[0] = flatten(a);

  Mat u(dims.n, dims.c);
  u << 0.1, 0.2, -0.3, -0.5, 0.25, 0.25;
  Mat rhs = lifted_rhs(params, u);
  CHECK((rhs - a).cwiseAbs().maxCoeff() < 1e-14);

  // Adding a per-row constant to the ambient output must not change the lift.
  FieldParams shifted = params;
  shifted.biases[0].segment(0, dims.c).array() += 7.5;
  shifted.biases[0].segment(dims.c, dims.c).array() -= 3.25;
  CHECK((lifted_rhs(shifted, u) - rhs).cwiseAbs().maxCoeff() < 1e-12);

  Mat bad(dims.n, dims.c + 1);
  bad.setZero();
  CHECK_THROWS_AS(lifted_rhs(params, bad), DimsError);
}

TEST_CASE("LiftedField: eval is tangent and matches the single-state form") {
  const Dims dims{2, 3};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Mlp, {8}, true}, dims, 17);
  LiftedField field(params);
  CHECK(field.dims() == dims);

  std::mt19937_64 rng(5);
  Mat batch(dims.state_size(), 4);
  for (Index b = 0; b < batch.cols(); ++b) {
    batch.col(b) = flatten(tangent_state_from(rng, dims, 0.8));
  }
  Mat out = field.eval(batch);
  for (Index b = 0; b < batch.cols(); ++b) {
    Mat rows = unflatten(out.col(b), dims);
    CHECK(rows.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    Mat single = lifted_rhs(params, unflatten(batch.col(b), dims));
    // Batched and single-column matrix products may round differently.
    CHECK((rows - single).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("LiftedField: vjp matches a directional finite difference") {
  const Dims dims{1, 3};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Mlp, {8}, true}, dims, 23);
  LiftedField field(params);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    Mat u = flatten(tangent_state_from(rng, dims, 0.6));
    Mat d = flatten(tangent_state_from(rng, dims, 1.0));
    Mat g(dims.state_size(), 1);
    for (Index k = 0; k < g.rows(); ++k) g(k, 0) = normal(rng);

    const double fd =
        ((field.eval(u + h * d) - field.eval(u - h * d)).col(0).dot(g.col(0))) / (2.0 * h);
    const double exact = field.vjp(u, g).col(0).dot(d.col(0));
    CHECK(std::abs(fd - exact) < 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("integrate: constant field is reproduced exactly by both schemes") {
  const Dims dims{2, 3};
  Mat a(dims.n, dims.c);
  a << 0.4, -0.1, -0.3, -0.2, 0.2, 0.0;
  ConstantField field(flatten(a), dims);

  Mat u0(dims.n, dims.c);
  u0 << 0.1, 0.2, -0.3, -0.5, 0.25, 0.25;
  Mat start = flatten(u0);
  Mat expected = start + flatten(a);

  for (OdeScheme scheme : {OdeScheme::Rk4, OdeScheme::Euler}) {
    IntegratorConfig config{scheme, 17};
    Mat end = integrate(field, start, 0.0, 1.0, config);
    CHECK((end - expected).cwiseAbs().maxCoeff() < 1e-13);
    Mat back = integrate(field, end, 1.0, 0.0, config);
    CHECK((back - start).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("integrate: linear flow matches the matrix exponential at fourth order") {
  const Dims dims{1, 3};
  Mat a(2, 2);
  a << 1.2, 0.4, 0.4, -0.9;
  LinearBasisField field(a, dims);

  Vec u_hat0(2);
  u_hat0 << 0.7, -0.3;
  Mat start = field.basis() * u_hat0;
  Mat exact = field.basis() * (expm_sym(a) * u_hat0);

  std::vector<double> errors;
  for (Index steps : {8, 16, 32}) {
    IntegratorConfig config{OdeScheme::Rk4, steps};
    errors.push_back((integrate(field, start, 0.0, 1.0, config) - exact).cwiseAbs().maxCoeff());
  }
  const double order_coarse = std::log2(errors[0] / errors[1]);
  const double order_fine = std::log2(errors[1] / errors[2]);
  CHECK(order_coarse > 3.5);
  CHECK(order_coarse < 4.5);
  CHECK(order_fine > 3.5);
  CHECK(order_fine < 4.5);
  CHECK(errors[2] < 1e-6);

  std::vector<double> euler_errors;
  for (Index steps : {64, 128}) {
    IntegratorConfig config{OdeScheme::Euler, steps};
    euler_errors.push_back(
        (integrate(field, start, 0.0, 1.0, config) - exact).cwiseAbs().maxCoeff());
  }
  const double euler_ratio = euler_errors[0] / euler_errors[1];
  CHECK(euler_ratio > 1.6);
  CHECK(euler_ratio < 2.4);
}

TEST_CASE("integrate: forward then backward returns to the start") {
  const Dims dims{2, 4};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Mlp, {16}, true}, dims, 29);
  LiftedField field(params);

  std::mt19937_64 rng(31);
  Mat start(dims.state_size(), 3);
  for (Index b = 0; b < start.cols(); ++b) {
    start.col(b) = flatten(tangent_state_from(rng, dims, 0.9));
  }
  IntegratorConfig config{OdeScheme::Rk4, 60};
  Mat forward = integrate(field, start, 0.0, 1.0, config);
  Mat back = integrate(field, forward, 1.0, 0.0, config);
  CHECK((back - start).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("integrate: softmax image of the trajectory obeys the replicator equation") {
  const Dims dims{1, 3};
  Mat a(2, 2);
  a << 0.8, -0.3, -0.3, 0.5;
  LinearBasisField field(a, dims);

  Vec u_hat0(2);
  u_hat0 << -0.4, 0.9;
  Mat start = field.basis() * u_hat0;

  Trajectory trajectory;
  IntegratorConfig config{OdeScheme::Rk4, 5000};
  integrate(field, start, 0.0, 0.5, config, &trajectory);
  REQUIRE(trajectory.u.size() == 5001);

  const std::size_t k = 2500;
  const double h = trajectory.t[k + 1] - trajectory.t[k];
  Mat w_prev = unflatten(softmax_rows_flat(trajectory.u[k - 1], dims), dims);
  Mat w_here = unflatten(softmax_rows_flat(trajectory.u[k], dims), dims);
  Mat w_next = unflatten(softmax_rows_flat(trajectory.u[k + 1], dims), dims);

  Mat w_dot_fd = (w_next - w_prev) / (2.0 * h);
  Mat u_dot = unflatten(field.eval(trajectory.u[k]), dims);
  Mat w_dot = replicator_rows(w_here, u_dot);
  CHECK((w_dot_fd - w_dot).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("integrate: trajectory records the start and every accepted step") {
  const Dims dims{2, 3};
  Mat a(dims.n, dims.c);
  a << 0.4, -0.1, -0.3, -0.2, 0.2, 0.0;
  ConstantField field(flatten(a), dims);

  Mat u0(dims.n, dims.c);
  u0 << 0.1, 0.2, -0.3, -0.5, 0.25, 0.25;
  Mat start = flatten(u0);

  Trajectory trajectory;
  IntegratorConfig config{OdeScheme::Rk4, 4};
  integrate(field, start, 0.0, 1.0, config, &trajectory);
  REQUIRE(trajectory.t.size() == 5);
  REQUIRE(trajectory.u.size() == 5);
  for (std::size_t k = 0; k < trajectory.t.size(); ++k) {
    const double t = 0.25 * static_cast<double>(k);
    CHECK(trajectory.t[k] == doctest::Approx(t).epsilon(1e-15));
    Mat expected = start + t * flatten(a);
    CHECK((trajectory.u[k] - expected).cwiseAbs().maxCoeff() < 1e-14);
    Mat w = unflatten(softmax_rows_flat(trajectory.u[k], dims), dims);
    CHECK(is_assignment_state(w));
  }
  CHECK((trajectory.u[0] - start).cwiseAbs().maxCoeff() == 0.0);

  // A second run replaces the old contents instead of appending.
  integrate(field, start, 0.0, 1.0, config, &trajectory);
  CHECK(trajectory.t.size() == 5);
}

TEST_CASE("integrate: argument validation") {
  const Dims dims{1, 2};
  ConstantField field(Vec::Zero(2), dims);
  Mat start = Mat::Zero(2, 1);
  IntegratorConfig config{OdeScheme::Rk4, 10};

  CHECK_THROWS_AS(integrate(field, start, 0.5, 0.5, config), std::domain_error);
  const IntegratorConfig no_steps{OdeScheme::Rk4, 0};
  CHECK_THROWS_AS(integrate(field, start, 0.0, 1.0, no_steps), std::invalid_argument);
  CHECK_THROWS_AS(integrate(field, Mat::Zero(3, 1), 0.0, 1.0, config), DimsError);
  Mat bad = Mat::Constant(2, 1, std::nan(""));
  CHECK_THROWS_AS(integrate(field, bad, 0.0, 1.0, config), std::invalid_argument);
}

TEST_CASE("integrate: a non-finite field aborts and names the step") {
  const Dims dims{1, 3};
  BrokenField field(dims);
  Mat start = Mat::Zero(3, 1);
  IntegratorConfig config{OdeScheme::Euler, 10};
  CHECK_THROWS_AS(integrate(field, start, 0.0, 1.0, config), NumericError);
  try {
    integrate(field, start, 0.0, 1.0, config);
    CHECK(false);
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("round_to_configuration: lowest-index tie rule with tie counting") {
  Mat w(3, 3);
  w << 0.2, 0.5, 0.3,   // clear winner at 1
      0.4, 0.4, 0.2,    // tie between 0 and 1 -> 0
      0.25, 0.25, 0.5;  // clear winner at 2
  SampleStats stats;
  Configuration config = round_to_configuration(w, &stats);
  REQUIRE(config.size() == 3);
  CHECK(config[0] == 1);
  CHECK(config[1] == 0);
  CHECK(config[2] == 2);
  CHECK(stats.argmax_ties == 1);

  Mat uniform = Mat::Constant(2, 4, 0.25);
  Configuration all_first = round_to_configuration(uniform, &stats);
  const Configuration both_zero{0, 0};
  CHECK(all_first == both_zero);
  CHECK(stats.argmax_ties == 3);  // accumulates: 1 + 2

  CHECK(round_to_configuration(w) == config);
  CHECK_THROWS_AS(round_to_configuration(Mat::Zero(2, 1)), DimsError);
}

TEST_CASE("sample_configurations: zero field gives uniform labels, deterministically") {
  const Dims dims{2, 3};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Linear, {}, false}, dims, 1);
  IntegratorConfig config{OdeScheme::Euler, 1};
  const Index count = 5000;  // crosses the internal chunk boundary

  std::mt19937_64 rng_a(99);
  SampleStats stats;
  std::vector<Configuration> samples = sample_configurations(params, count, rng_a, config, &stats);
  REQUIRE(samples.size() == static_cast<std::size_t>(count));
  CHECK(stats.argmax_ties == 0);

  Mat freq = Mat::Zero(dims.n, dims.c);
  for (const Configuration& s : samples) {
    for (Index i = 0; i < dims.n; ++i) freq(i, s[static_cast<std::size_t>(i)]) += 1.0;
  }
  freq /= static_cast<double>(count);
  CHECK((freq.array() - 1.0 / 3.0).abs().maxCoeff() < 0.03);

  std::mt19937_64 rng_b(99);
  CHECK(sample_configurations(params, count, rng_b, config) == samples);

  std::mt19937_64 rng_c(100);
  CHECK(sample_configurations(params, count, rng_c, config) != samples);

  std::mt19937_64 rng_d(1);
  CHECK_THROWS_AS(sample_configurations(params, 0, rng_d, config), std::invalid_argument);
}

TEST_CASE("sample_configurations: constant drift shifts label frequencies as predicted") {
  // n=1, c=2: the reference row is (z, -z) with z ~ N(0, 1/2); a constant
  // drift (1.5, -1.5) makes label 0 win iff z > -1.5, with probability
  // Phi(1.5 / sqrt(1/2)) = (1 + erf(1.5)) / 2.
  const Dims dims{1, 2};
  FieldParams params = seeded_field(FieldSpec{FieldKind::Linear, {}, true}, dims, 1);
  params.biases[0] << 1.5, -1.5;

  IntegratorConfig config{OdeScheme::Rk4, 8};
  std::mt19937_64 rng(4242);
  const Index count = 20000;
  std::vector<Configuration> samples = sample_configurations(params, count, rng, config);

  double zeros = 0.0;
  for (const Configuration& s : samples) zeros += (s[0] == 0) ? 1.0 : 0.0;
  const double expected = 0.5 * (1.0 + std::erf(1.5));
  CHECK(std::abs(zeros / static_cast<double>(count) - expected) < 0.005);
}
