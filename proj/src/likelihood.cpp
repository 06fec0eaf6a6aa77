#include "assignflow/likelihood.hpp"

#include "assignflow/geometry.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace assignflow {

namespace {

constexpr int kProposalRetryCap = 1000;

// Columns (i, k) hold the k-th basis vector of T0 embedded at factor block i;
// together they form an orthonormal basis of the product tangent space.
Mat basis_block_matrix(const Mat& q_basis, const Dims& dims) {
  const Index c = dims.c;
  const Index d_per = c - 1;
  Mat blocks = Mat::Zero(dims.state_size(), dims.n * d_per);
  for (Index i = 0; i < dims.n; ++i) {
    for (Index k = 0; k < d_per; ++k) {
      blocks.block(i * c, i * d_per + k, c, 1) = q_basis.col(k);
    }
  }
  return blocks;
}

// Divergence of the field in basis coordinates for every column of u, via
// one batched vector-Jacobian product per basis direction.
Vec divergence_batch(const TangentField& field, const Mat& u, const Mat& blocks,
                     const CnfConfig& config, std::mt19937_64* rng) {
  const Dims dims = field.dims();
  const Index b_size = u.cols();
  const Index n_dirs = blocks.cols();

  if (config.divergence == DivergenceMode::Hutchinson) {
    if (!rng) {
      throw std::invalid_argument("divergence: Hutchinson mode needs an rng");
    }
    const Index probes = config.hutchinson_probes;
    if (probes < 1) throw std::invalid_argument("divergence: probe count must be >= 1");
    std::bernoulli_distribution coin(0.5);
    Vec div = Vec::Zero(b_size);
    for (Index b = 0; b < b_size; ++b) {
      Mat z(dims.state_size(), probes);
      for (Index m = 0; m < probes; ++m) {
        Vec hat(n_dirs);
        for (Index k = 0; k < n_dirs; ++k) hat[k] = coin(*rng) ? 1.0 : -1.0;
        z.col(m) = blocks * hat;
      }
      Mat pulled = field.vjp(u.col(b).replicate(1, probes), z);
      div[b] = pulled.cwiseProduct(z).sum() / static_cast<double>(probes);
    }
    return div;
  }

  // Expand to one column per (sample, direction) pair.
  Mat u_big(dims.state_size(), b_size * n_dirs);
  Mat dir_big(dims.state_size(), b_size * n_dirs);
  for (Index b = 0; b < b_size; ++b) {
    u_big.middleCols(b * n_dirs, n_dirs) = u.col(b).replicate(1, n_dirs);
    dir_big.middleCols(b * n_dirs, n_dirs) = blocks;
  }

  Vec div = Vec::Zero(b_size);
  if (config.divergence == DivergenceMode::Exact) {
    Mat pulled = field.vjp(u_big, dir_big);
    for (Index b = 0; b < b_size; ++b) {
      div[b] = pulled.middleCols(b * n_dirs, n_dirs).cwiseProduct(blocks).sum();
    }
  } else {
    const double h = config.fd_step;
    if (!(h > 0.0)) throw std::invalid_argument("divergence: fd step must be positive");
    Mat shifted = field.eval(u_big + h * dir_big);
    Mat base = field.eval(u);
    for (Index b = 0; b < b_size; ++b) {
      Mat delta = (shifted.middleCols(b * n_dirs, n_dirs).colwise() - base.col(b)) / h;
      div[b] = delta.cwiseProduct(blocks).sum();
    }
  }
  return div;
}

}  // namespace

Mat build_basis(Index c) {
  if (c < 2) throw DimsError("build_basis: need c >= 2");
  Mat q = Mat::Zero(c, c - 1);
  for (Index k = 1; k < c; ++k) {
    const double kk = static_cast<double>(k);
    const double scale = 1.0 / std::sqrt(kk * (kk + 1.0));
    for (Index j = 0; j < k; ++j) q(j, k - 1) = scale;
    q(k, k - 1) = -kk * scale;
  }
  return q;
}

double region_radius(const Vec& q_tilde_row) {
  const Index c = q_tilde_row.size();
  if (c < 2) throw DimsError("region_radius: need c >= 2");
  const double norm = q_tilde_row.norm();
  if (!(norm > 0.0)) {
    throw std::domain_error("region_radius: degenerate (zero) tangent center");
  }
  return norm * std::sqrt(static_cast<double>(c) / (2.0 * static_cast<double>(c - 1)));
}

double chi2_cdf(double x, int k) {
  if (k < 1) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi2_cdf: x must be nonnegative");
  return boost::math::gamma_p(0.5 * static_cast<double>(k), 0.5 * x);
}

double sigma2_from_mass(double r, Index c, double mass) {
  if (!(r > 0.0)) throw std::domain_error("sigma2_from_mass: radius must be positive");
  if (c < 2) throw DimsError("sigma2_from_mass: need c >= 2");
  if (!(mass > 0.0 && mass < 1.0)) {
    throw std::domain_error("sigma2_from_mass: mass must lie in (0, 1)");
  }
  const int dof = static_cast<int>(c - 1);

  // Find y with chi2_cdf(y, dof) = mass; then sigma^2 = r^2 / y.
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_cdf(hi, dof) < mass) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("sigma2_from_mass: bracketing failed");
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * std::max(1.0, lo); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < mass ? lo : hi) = mid;
  }
  const double y = 0.5 * (lo + hi);
  return r * r / y;
}

RegionSpec make_region(const Configuration& alpha, const Dims& dims, double eps, double mass) {
  check_configuration(alpha, dims);
  RegionSpec region;
  region.alpha = alpha;
  region.mass = mass;
  region.q_tilde = log_e_rows(barycenter_state(dims), smoothed_corner(alpha, dims, eps));
  region.radius = Vec(dims.n);
  region.sigma2 = Vec(dims.n);
  for (Index i = 0; i < dims.n; ++i) {
    region.radius[i] = region_radius(region.q_tilde.row(i).transpose());
    region.sigma2[i] = sigma2_from_mass(region.radius[i], dims.c, mass);
    const double captured =
        chi2_cdf(region.radius[i] * region.radius[i] / region.sigma2[i],
                 static_cast<int>(dims.c - 1));
    if (std::abs(captured - mass) > 1e-9) {
      throw NumericError("make_region: ball mass equation not satisfied");
    }
  }
  return region;
}

ProposalSample sample_proposal(const RegionSpec& region, const Mat& q_basis,
                               std::mt19937_64& rng, ProposalStats* stats) {
  const Index n = region.q_tilde.rows();
  const Index c = region.q_tilde.cols();
  const Index d_per = c - 1;
  if (q_basis.rows() != c || q_basis.cols() != d_per) {
    throw DimsError("sample_proposal: basis shape mismatch");
  }
  std::normal_distribution<double> normal(0.0, 1.0);

  ProposalSample sample;
  sample.v = Mat(n, c);
  for (Index i = 0; i < n; ++i) {
    const Vec center = q_basis.transpose() * region.q_tilde.row(i).transpose();
    const double sigma = std::sqrt(region.sigma2[i]);
    const double r = region.radius[i];
    Vec x(d_per);
    bool accepted = false;
    for (int trial = 0; trial < kProposalRetryCap && !accepted; ++trial) {
      for (Index k = 0; k < d_per; ++k) x[k] = sigma * normal(rng);
      if (stats) stats->trials += 1;
      if (x.norm() <= r) {
        accepted = true;
        if (stats) stats->accepts += 1;
      }
    }
    if (!accepted) {
      throw NumericError("sample_proposal: rejection retry cap exceeded at factor " +
                         std::to_string(i));
    }
    sample.log_density += -0.5 * static_cast<double>(d_per) *
                              std::log(2.0 * std::numbers::pi * region.sigma2[i]) -
                          x.squaredNorm() / (2.0 * region.sigma2[i]) - std::log(region.mass);
    sample.v.row(i) = (q_basis * (center + x)).transpose();
  }
  return sample;
}

double gaussian_log_density0(const Mat& u_tangent) {
  const Index n = u_tangent.rows();
  const Index c = u_tangent.cols();
  if (n < 1 || c < 2) throw DimsError("gaussian_log_density0: expected an n x c tangent");
  // Delegate through the flattened layout so both entry points accumulate
  // the norm in the same order.
  return gaussian_log_density0_flat(flatten(u_tangent), Dims{n, c});
}

double gaussian_log_density0_flat(const Vec& u_flat, const Dims& dims) {
  check_dims(dims);
  if (u_flat.size() != dims.state_size()) {
    throw DimsError("gaussian_log_density0_flat: size mismatch");
  }
  const double dof = static_cast<double>(dims.n * (dims.c - 1));
  return -0.5 * u_flat.squaredNorm() - 0.5 * dof * std::log(2.0 * std::numbers::pi);
}

double divergence(const TangentField& field, const Vec& u, const Mat& q_basis,
                  const CnfConfig& config, std::mt19937_64* rng) {
  const Dims dims = field.dims();
  if (u.size() != dims.state_size()) {
    throw DimsError("divergence: state size mismatch");
  }
  Mat blocks = basis_block_matrix(q_basis, dims);
  return divergence_batch(field, u, blocks, config, rng)[0];
}

Vec cnf_log_density_batch(const TangentField& field, const Mat& v_flat_cols,
                          const CnfConfig& config, std::mt19937_64* rng) {
  const Dims dims = field.dims();
  if (v_flat_cols.rows() != dims.state_size()) {
    throw DimsError("cnf_log_density_batch: state rows do not match the field dims");
  }
  if (config.ode.steps < 1) {
    throw std::invalid_argument("cnf_log_density_batch: step count must be >= 1");
  }
  if (!(config.t_end > 0.0)) {
    throw std::domain_error("cnf_log_density_batch: t_end must be positive");
  }
  if (!v_flat_cols.allFinite()) {
    throw std::invalid_argument("cnf_log_density_batch: non-finite input state");
  }

  const Index b_size = v_flat_cols.cols();
  const Mat q_basis = build_basis(dims.c);
  const Mat blocks = basis_block_matrix(q_basis, dims);
  const double dt = -config.t_end / static_cast<double>(config.ode.steps);

  Mat u = v_flat_cols;
  Vec logdet = Vec::Zero(b_size);

  auto rhs = [&](const Mat& state) { return field.eval(state); };
  auto div = [&](const Mat& state) {
    return divergence_batch(field, state, blocks, config, rng);
  };

  for (Index step = 0; step < config.ode.steps; ++step) {
    if (config.ode.scheme == OdeScheme::Rk4) {
      Mat k1 = rhs(u);
      Vec d1 = div(u);
      Mat u2 = u + (0.5 * dt) * k1;
      Mat k2 = rhs(u2);
      Vec d2 = div(u2);
      Mat u3 = u + (0.5 * dt) * k2;
      Mat k3 = rhs(u3);
      Vec d3 = div(u3);
      Mat u4 = u + dt * k3;
      Mat k4 = rhs(u4);
      Vec d4 = div(u4);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      logdet += (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    } else {
      logdet += dt * div(u);
      u += dt * rhs(u);
    }
    if (!u.allFinite() || !logdet.allFinite()) {
      throw NumericError("cnf_log_density_batch: non-finite state after step " +
                         std::to_string(step + 1));
    }
  }

  // log nu1(v) = log N0(u(0)) - integral_0^t_end div, and the backward sweep
  // accumulated exactly the negated integral.
  Vec out(b_size);
  for (Index b = 0; b < b_size; ++b) {
    out[b] = gaussian_log_density0_flat(u.col(b), dims) + logdet[b];
  }
  return out;
}

double cnf_log_density(const TangentField& field, const Mat& v, const CnfConfig& config,
                       std::mt19937_64* rng) {
  const Dims dims = field.dims();
  if (v.rows() != dims.n || v.cols() != dims.c) {
    throw DimsError("cnf_log_density: expected an n x c tangent point");
  }
  return cnf_log_density_batch(field, flatten(v), config, rng)[0];
}

ISEstimate loglik_lower_bound(const FieldParams& params, const Configuration& alpha,
                              Index n_samples, double eps, double mass,
                              const CnfConfig& config, std::mt19937_64& rng) {
  if (n_samples < 1) {
    throw std::invalid_argument("loglik_lower_bound: need at least one sample");
  }
  const Dims dims = params.dims;
  const RegionSpec region = make_region(alpha, dims, eps, mass);
  const Mat q_basis = build_basis(dims.c);
  LiftedField field(params);

  Mat v(dims.state_size(), n_samples);
  Vec log_rho(n_samples);
  for (Index k = 0; k < n_samples; ++k) {
    ProposalSample proposal = sample_proposal(region, q_basis, rng);
    v.col(k) = flatten(proposal.v);
    log_rho[k] = proposal.log_density;
  }

  Vec log_model = cnf_log_density_batch(field, v, config, &rng);

  ISEstimate estimate;
  estimate.n_samples = static_cast<std::size_t>(n_samples);
  estimate.terms.resize(estimate.n_samples);
  double mean = 0.0;
  for (Index k = 0; k < n_samples; ++k) {
    estimate.terms[static_cast<std::size_t>(k)] = log_model[k] - log_rho[k];
    mean += estimate.terms[static_cast<std::size_t>(k)];
  }
  mean /= static_cast<double>(n_samples);
  estimate.bound_nats = mean;
  estimate.bits_per_dim = -mean / (static_cast<double>(dims.n) * std::numbers::ln2);

  if (n_samples >= 2) {
    double ss = 0.0;
    for (double term : estimate.terms) ss += (term - mean) * (term - mean);
    estimate.std_error =
        std::sqrt(ss / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
  } else {
    estimate.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return estimate;
}

}  // namespace assignflow
