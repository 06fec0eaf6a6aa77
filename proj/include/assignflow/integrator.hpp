#pragma once

#include "assignflow/common.hpp"
#include "assignflow/field.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace assignflow {

enum class OdeScheme { Rk4, Euler };

struct IntegratorConfig {
  OdeScheme scheme = OdeScheme::Rk4;
  Index steps = 100;
};

// Autonomous vector field on flattened tangent coordinates, with batched
// evaluation (one state per column) and a vector-Jacobian product.
class TangentField {
 public:
  virtual ~TangentField() = default;
  virtual Dims dims() const = 0;
  virtual Mat eval(const Mat& u) const = 0;
  // Returns J(u)^T g column-wise for upstream g.
  virtual Mat vjp(const Mat& u, const Mat& upstream) const = 0;
};

// Tangent-coordinate lift of the assignment flow,
//   udot = Pi0[ F_theta(exp_e(barycenter, u)) ],
// whose softmax image follows wdot = R_w[F_theta(w)].
class LiftedField final : public TangentField {
 public:
  explicit LiftedField(const FieldParams& params);
  Dims dims() const override;
  Mat eval(const Mat& u) const override;
  Mat vjp(const Mat& u, const Mat& upstream) const override;

 private:
  const FieldParams* params_;
};

// Single-state convenience form of LiftedField::eval (n x c in/out).
Mat lifted_rhs(const FieldParams& params, const Mat& u);

struct Trajectory {
  std::vector<double> t;
  std::vector<Mat> u;  // flattened batches aligned with t, including t0
};

// Fixed-step integration of udot = field(u) from t0 to t1, in either time
// direction.  Throws NumericError when a state stops being finite.
Mat integrate(const TangentField& field, const Mat& u_start, double t0, double t1,
              const IntegratorConfig& config, Trajectory* trajectory = nullptr);

struct SampleStats {
  std::int64_t argmax_ties = 0;
};

// Row-wise argmax with the lowest-index tie rule; ties are counted.
Configuration round_to_configuration(const Mat& w, SampleStats* stats = nullptr);

// Draw count reference points, integrate each to t = 1, round row-wise.
std::vector<Configuration> sample_configurations(const FieldParams& params, Index count,
                                                 std::mt19937_64& rng,
                                                 const IntegratorConfig& config,
                                                 SampleStats* stats = nullptr);

}  // namespace assignflow
