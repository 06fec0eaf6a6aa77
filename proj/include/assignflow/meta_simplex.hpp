#pragma once

#include "assignflow/common.hpp"

#include <cstdint>

namespace assignflow {

// Dense joint distributions over c^n configurations are only materialized up
// to this size.
inline constexpr std::int64_t kDenseBudget = std::int64_t{1} << 24;

// c^n with an overflow-safe budget guard; throws DimsError beyond the budget.
std::int64_t joint_size(const Dims& dims);

// Row-major configuration codec: the label of variable 0 is most significant.
std::int64_t config_to_index(const Configuration& config, const Dims& dims);
Configuration index_to_config(std::int64_t index, const Dims& dims);

// Product embedding T(W)_alpha = prod_i W_{i, alpha_i}.  Accepts states on
// the closed simplex (zeros allowed).
Vec embed(const Mat& w, const Dims& dims);

// Marginalization M: (M p)_{i,j} = sum of p over configurations with
// alpha_i = j.  Left inverse of embed on product states.
Mat marginalize(const Vec& p, const Dims& dims);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const Vec& p);

Vec empirical_joint(const std::vector<Configuration>& samples, const Dims& dims);

double tv_distance(const Vec& p, const Vec& q);

}  // namespace assignflow
