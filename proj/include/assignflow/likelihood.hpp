#pragma once

#include "assignflow/common.hpp"
#include "assignflow/integrator.hpp"

#include <random>
#include <vector>

namespace assignflow {

// Orthonormal basis of T0 in R^c (Helmert construction): Q is c x (c-1) with
// Q^T Q = I, Q^T 1 = 0, and Q Q^T the centering projector.
Mat build_basis(Index c);

// Largest ball radius around a smoothed-corner tangent row within which the
// row argmax cannot change: r = |q| * sqrt(c / (2(c-1))).
double region_radius(const Vec& q_tilde_row);

// Chi-square CDF with k degrees of freedom, as the regularized lower
// incomplete gamma P(k/2, x/2).
double chi2_cdf(double x, int k);

// Solves chi2_cdf(r^2 / sigma^2, c - 1) = mass for sigma^2 by bisection.
double sigma2_from_mass(double r, Index c, double mass);

struct RegionSpec {
  Configuration alpha;
  Mat q_tilde;  // n x c tangent center
  Vec radius;   // per factor
  Vec sigma2;   // per factor
  double mass = 0.8;
};

RegionSpec make_region(const Configuration& alpha, const Dims& dims, double eps,
                       double mass = 0.8);

struct ProposalStats {
  std::int64_t trials = 0;
  std::int64_t accepts = 0;
};

struct ProposalSample {
  Mat v;                    // n x c tangent point
  double log_density = 0.0;  // ball-truncated Gaussian density in basis coordinates
};

// Per-factor rejection sampling of the truncated Gaussian proposal; throws
// NumericError when a factor exceeds the retry cap.
ProposalSample sample_proposal(const RegionSpec& region, const Mat& q_basis,
                               std::mt19937_64& rng, ProposalStats* stats = nullptr);

enum class DivergenceMode { Exact, FiniteDiff, Hutchinson };

struct CnfConfig {
  IntegratorConfig ode{OdeScheme::Rk4, 100};
  DivergenceMode divergence = DivergenceMode::Exact;
  double fd_step = 1e-6;
  Index hutchinson_probes = 8;
  double t_end = 1.0;
};

// Standard normal log-density of a tangent state in basis coordinates; the
// basis is orthonormal, so the ambient norm is used directly with dimension
// n(c-1).
double gaussian_log_density0(const Mat& u_tangent);
double gaussian_log_density0_flat(const Vec& u_flat, const Dims& dims);

// Divergence of the field at a flattened state, taken in basis coordinates.
// Exact mode traces the Jacobian with n(c-1) vector-Jacobian products.
double divergence(const TangentField& field, const Vec& u, const Mat& q_basis,
                  const CnfConfig& config, std::mt19937_64* rng = nullptr);

// Log-density of the flow push-forward at tangent points v via instantaneous
// change of variables: integrate (state, logdet) backward from t_end to 0.
double cnf_log_density(const TangentField& field, const Mat& v, const CnfConfig& config,
                       std::mt19937_64* rng = nullptr);
Vec cnf_log_density_batch(const TangentField& field, const Mat& v_flat_cols,
                          const CnfConfig& config, std::mt19937_64* rng = nullptr);

struct ISEstimate {
  double bound_nats = 0.0;
  double bits_per_dim = 0.0;
  std::vector<double> terms;
  std::size_t n_samples = 0;
  double std_error = 0.0;  // NaN when n_samples < 2
};

// Importance-sampling lower bound on log p(alpha) under the flow model.
ISEstimate loglik_lower_bound(const FieldParams& params, const Configuration& alpha,
                              Index n_samples, double eps, double mass,
                              const CnfConfig& config, std::mt19937_64& rng);

}  // namespace assignflow
