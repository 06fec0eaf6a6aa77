#include "assignflow/common.hpp"

namespace assignflow {

void check_dims(const Dims& dims) {
  if (!dims.valid()) {
    throw DimsError("invalid dims: need n >= 1 and c >= 2, got n=" + std::to_string(dims.n) +
                    " c=" + std::to_string(dims.c));
  }
}

void check_configuration(const Configuration& config, const Dims& dims) {
  check_dims(dims);
  if (static_cast<Index>(config.size()) != dims.n) {
    throw DimsError("configuration has " + std::to_string(config.size()) + " labels, expected " +
                    std::to_string(dims.n));
  }
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config[i] < 0 || config[i] >= dims.c) {
      throw std::invalid_argument("label " + std::to_string(config[i]) + " at position " +
                                  std::to_string(i) + " is outside [0, " + std::to_string(dims.c) +
                                  ")");
    }
  }
}

}  // namespace assignflow
