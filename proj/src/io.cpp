#include "assignflow/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace assignflow {

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

namespace {

constexpr char kCheckpointMagic[4] = {'A', 'F', 'C', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

bool parse_header(const std::string& line, const std::string& tag, Dims& dims) {
  std::istringstream ss(line);
  std::string hash;
  ss >> hash;
  if (hash != "#") {
    // Tolerate "#n=..." without the space.
    if (hash.size() > 1 && hash[0] == '#') {
      ss.clear();
      ss.str(line.substr(1));
    } else {
      return false;
    }
  }
  std::string token;
  long long n = -1;
  long long c = -1;
  bool tagged = tag.empty();
  while (ss >> token) {
    if (token == tag) {
      tagged = true;
    } else if (token.rfind("n=", 0) == 0) {
      n = std::stoll(token.substr(2));
    } else if (token.rfind("c=", 0) == 0) {
      c = std::stoll(token.substr(2));
    }
  }
  if (!tagged || n < 0 || c < 0) return false;
  dims = Dims{static_cast<Index>(n), static_cast<Index>(c)};
  return true;
}

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  write_raw(out, &value, sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("checkpoint is truncated");
  return value;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  check_dims(dataset.dims);
  auto out = open_output(path);
  out << "# n=" << dataset.dims.n << " c=" << dataset.dims.c << "\n";
  for (const auto& config : dataset.configs) {
    check_configuration(config, dataset.dims);
    for (std::size_t i = 0; i < config.size(); ++i) {
      out << (i ? " " : "") << config[i];
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path, bool allow_empty,
                     const std::optional<Dims>& expected) {
  auto in = open_input(path);
  Dataset dataset;
  bool have_dims = false;
  if (expected) {
    dataset.dims = *expected;
    have_dims = true;
  }

  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;  // blank line
    if (first[0] == '#') {
      Dims header_dims;
      if (!saw_header && parse_header(line, "", header_dims)) {
        saw_header = true;
        if (expected && header_dims != *expected) {
          throw DimsError("dataset '" + path.string() + "' declares n=" +
                          std::to_string(header_dims.n) + " c=" + std::to_string(header_dims.c) +
                          ", expected n=" + std::to_string(expected->n) + " c=" +
                          std::to_string(expected->c));
        }
        dataset.dims = header_dims;
        have_dims = true;
      }
      continue;
    }
    if (!have_dims) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": missing '# n=<n> c=<c>' header");
    }
    Configuration config;
    config.reserve(static_cast<std::size_t>(dataset.dims.n));
    std::istringstream body(line);
    long long label = 0;
    while (body >> label) {
      if (label < 0 || label >= dataset.dims.c) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": label " +
                          std::to_string(label) + " outside [0, " +
                          std::to_string(dataset.dims.c) + ")");
      }
      config.push_back(static_cast<int>(label));
    }
    if (!body.eof()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected integer labels");
    }
    if (static_cast<Index>(config.size()) != dataset.dims.n) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dataset.dims.n) + " labels, found " +
                        std::to_string(config.size()));
    }
    dataset.configs.push_back(std::move(config));
  }

  if (!have_dims) {
    if (allow_empty && expected) return dataset;
    throw FormatError(path.string() + ": missing '# n=<n> c=<c>' header");
  }
  if (dataset.configs.empty() && !allow_empty) {
    throw FormatError(path.string() + ": dataset has no configurations");
  }
  return dataset;
}

void save_joint(const std::filesystem::path& path, const Vec& probs, const Dims& dims) {
  check_dims(dims);
  auto out = open_output(path);
  out << "# joint n=" << dims.n << " c=" << dims.c << "\n";
  out << std::setprecision(17);
  for (Index a = 0; a < probs.size(); ++a) {
    out << probs[a] << "\n";
  }
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

JointFile load_joint(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  Dims dims;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    if (first[0] == '#') {
      if (parse_header(line, "joint", dims)) {
        have_header = true;
        break;
      }
      continue;
    }
    break;
  }
  if (!have_header) {
    throw FormatError(path.string() + ": missing '# joint n=<n> c=<c>' header");
  }
  check_dims(dims);

  std::int64_t expected = 1;
  for (Index i = 0; i < dims.n; ++i) expected *= dims.c;

  Vec probs(expected);
  for (std::int64_t a = 0; a < expected; ++a) {
    if (!(in >> probs[a])) {
      throw FormatError(path.string() + ": expected " + std::to_string(expected) +
                        " probabilities");
    }
  }
  if (!probs.allFinite() || (probs.array() < 0.0).any()) {
    throw FormatError(path.string() + ": probabilities must be finite and nonnegative");
  }
  const double total = probs.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw FormatError(path.string() + ": probabilities sum to " + std::to_string(total) +
                      ", expected 1 within 1e-6");
  }
  probs /= total;
  return {dims, probs};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const FieldParams& params = checkpoint.params;
  check_dims(params.dims);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    auto out = open_output(tmp, std::ios::binary);
    write_raw(out, kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint8_t>(params.kind == FieldKind::Mlp ? 1 : 0));
    write_pod(out, static_cast<std::uint8_t>(params.bias ? 1 : 0));
    write_pod(out, static_cast<std::uint8_t>(checkpoint.integrator.scheme == OdeScheme::Euler
                                                 ? 1
                                                 : 0));
    write_pod(out, static_cast<std::uint8_t>(0));
    write_pod(out, static_cast<std::int64_t>(params.dims.n));
    write_pod(out, static_cast<std::int64_t>(params.dims.c));
    write_pod(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
    for (Index size : params.layer_sizes) {
      write_pod(out, static_cast<std::int64_t>(size));
    }
    write_pod(out, checkpoint.eps);
    write_pod(out, static_cast<std::int64_t>(checkpoint.integrator.steps));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      const Mat& w = params.weights[l];
      for (Index r = 0; r < w.rows(); ++r) {
        for (Index col = 0; col < w.cols(); ++col) {
          write_pod(out, w(r, col));
        }
      }
      for (Index r = 0; r < params.biases[l].size(); ++r) {
        write_pod(out, params.biases[l][r]);
      }
    }
    if (!out) throw IoError("failed while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw CheckpointError("'" + path.string() + "' is not a checkpoint (bad magic)");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto kind = read_pod<std::uint8_t>(in);
  const auto bias = read_pod<std::uint8_t>(in);
  const auto scheme = read_pod<std::uint8_t>(in);
  read_pod<std::uint8_t>(in);  // reserved
  if (kind > 1 || bias > 1 || scheme > 1) {
    throw CheckpointError("corrupt checkpoint header");
  }
  const auto n = read_pod<std::int64_t>(in);
  const auto c = read_pod<std::int64_t>(in);
  if (n < 1 || c < 2 || n > (1 << 20) || c > (1 << 20)) {
    throw CheckpointError("corrupt checkpoint dims");
  }

  Checkpoint checkpoint;
  FieldParams& params = checkpoint.params;
  params.kind = kind == 1 ? FieldKind::Mlp : FieldKind::Linear;
  params.bias = bias == 1;
  params.dims = Dims{static_cast<Index>(n), static_cast<Index>(c)};

  const auto layer_count = read_pod<std::uint32_t>(in);
  if (layer_count < 2 || layer_count > 64) {
    throw CheckpointError("corrupt checkpoint layer table");
  }
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto size = read_pod<std::int64_t>(in);
    if (size < 1 || size > (1 << 24)) throw CheckpointError("corrupt checkpoint layer table");
    params.layer_sizes.push_back(static_cast<Index>(size));
  }
  const Index nc = params.dims.state_size();
  if (params.layer_sizes.front() != nc || params.layer_sizes.back() != nc) {
    throw CheckpointError("checkpoint layer table does not match dims");
  }
  if (params.kind == FieldKind::Linear && layer_count != 2) {
    throw CheckpointError("linear checkpoint must have exactly one layer");
  }

  checkpoint.eps = read_pod<double>(in);
  if (!(checkpoint.eps > 0.0 && checkpoint.eps < 1.0)) {
    throw CheckpointError("corrupt checkpoint eps");
  }
  checkpoint.integrator.scheme = scheme == 1 ? OdeScheme::Euler : OdeScheme::Rk4;
  checkpoint.integrator.steps = static_cast<Index>(read_pod<std::int64_t>(in));
  if (checkpoint.integrator.steps < 1) {
    throw CheckpointError("corrupt checkpoint integrator steps");
  }

  for (std::size_t l = 0; l + 1 < params.layer_sizes.size(); ++l) {
    const Index fan_in = params.layer_sizes[l];
    const Index fan_out = params.layer_sizes[l + 1];
    Mat w(fan_out, fan_in);
    for (Index r = 0; r < fan_out; ++r) {
      for (Index col = 0; col < fan_in; ++col) {
        w(r, col) = read_pod<double>(in);
      }
    }
    params.weights.push_back(std::move(w));
    const bool layer_bias = params.kind == FieldKind::Mlp || params.bias;
    Vec b;
    if (layer_bias) {
      b = Vec(fan_out);
      for (Index r = 0; r < fan_out; ++r) b[r] = read_pod<double>(in);
    }
    params.biases.push_back(std::move(b));
  }

  char extra = 0;
  if (in.read(&extra, 1)) {
    throw CheckpointError("checkpoint has trailing bytes");
  }
  return checkpoint;
}

std::map<std::string, std::string> load_kv_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::string> entries;
  std::string line;
  long line_no = 0;
  auto trim = [](std::string s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return std::string();
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto equals = line.find('=');
    if (equals == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, equals));
    std::string value = trim(line.substr(equals + 1));
    if (key.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    if (entries.count(key)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": duplicate key '" +
                        key + "'");
    }
    entries[key] = value;
  }
  return entries;
}

void write_loss_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace) {
  auto out = open_output(path);
  out << "step,loss\n" << std::setprecision(17);
  for (std::size_t s = 0; s < trace.size(); ++s) {
    out << s << "," << trace[s] << "\n";
  }
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

}  // namespace assignflow
