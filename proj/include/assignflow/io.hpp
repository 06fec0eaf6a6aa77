#pragma once

#include "assignflow/common.hpp"
#include "assignflow/field.hpp"
#include "assignflow/integrator.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace assignflow {

struct Dataset {
  Dims dims;
  std::vector<Configuration> configs;
};

// Text format: a "# n=<n> c=<c>" header line, then one configuration per
// line as space-separated labels.  '#' lines and blank lines are skipped.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

// Headerless files are accepted when expected dims are supplied; empty files
// yield an empty dataset only when allow_empty is set.
Dataset load_dataset(const std::filesystem::path& path, bool allow_empty = false,
                     const std::optional<Dims>& expected = std::nullopt);

struct JointFile {
  Dims dims;
  Vec probs;
};

// Text format: "# joint n=<n> c=<c>" header, then c^n probabilities in
// configuration-index order; they must sum to 1 within 1e-6 and are
// renormalized on load.
void save_joint(const std::filesystem::path& path, const Vec& probs, const Dims& dims);
JointFile load_joint(const std::filesystem::path& path);

struct Checkpoint {
  FieldParams params;
  double eps = 0.01;
  IntegratorConfig integrator;
};

// Binary checkpoint: magic/version header, variant and shape metadata, then
// little-endian 64-bit float parameter blocks in declaration order.  Saved
// atomically via a temporary file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Flat "key = value" run-config files; '#' starts a comment.
std::map<std::string, std::string> load_kv_config(const std::filesystem::path& path);

void write_loss_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace);

}  // namespace assignflow
