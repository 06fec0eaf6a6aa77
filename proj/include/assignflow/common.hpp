#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace assignflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// One category label per variable, each in [0, c).
using Configuration = std::vector<int>;

struct Dims {
  Index n = 0;
  Index c = 0;

  Index state_size() const { return n * c; }
  bool valid() const { return n >= 1 && c >= 2; }
};

inline bool operator==(const Dims& a, const Dims& b) { return a.n == b.n && a.c == b.c; }
inline bool operator!=(const Dims& a, const Dims& b) { return !(a == b); }

// Error taxonomy shared by the library and the CLI; each class maps to a
// distinct process exit code (see README).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_dims(const Dims& dims);
void check_configuration(const Configuration& config, const Dims& dims);

}  // namespace assignflow
