#include "assignflow/flow_matching.hpp"
#include "assignflow/geometry.hpp"
#include "assignflow/integrator.hpp"
#include "assignflow/io.hpp"
#include "assignflow/likelihood.hpp"
#include "assignflow/meta_simplex.hpp"
#include "assignflow/targets.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <string>

namespace {

using namespace assignflow;

// One flat option set shared by every subcommand; a run-config file may carry
// keys for several commands, so unused keys are accepted everywhere.
struct RunConfig {
  long long n = -1;
  long long c = -1;
  std::string field = "linear";
  std::string hidden;
  bool bias = false;
  double eps = 0.01;
  long long batch = 512;
  long long steps = 2000;
  double lr = 5e-4;
  std::string schedule = "constant";
  unsigned long long seed = 0;
  std::string integrator = "rk4";
  long long integrator_steps = 100;
  double mass = 0.8;
  long long loglik_samples = 200;
  double t_end = 1.0;
  std::string divergence = "exact";
  long long count = -1;

  std::string config_path;
  std::string dataset;
  std::string checkpoint;
  std::string out;
  std::string trace;
  std::string configs;
  std::string samples;
  std::string ref_dataset;
  std::string ref_joint;
  std::string target;
  std::string joint;
  std::string histogram;
};

struct CommandContext {
  RunConfig rc;
  std::map<std::string, CLI::Option*> options;
  std::set<std::string> provided;
};

long long to_ll(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw FormatError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw FormatError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw FormatError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

void apply_config(CommandContext& ctx) {
  for (const auto& [key, option] : ctx.options) {
    if (option && option->count() > 0) ctx.provided.insert(key);
  }
  if (ctx.rc.config_path.empty()) return;

  RunConfig& rc = ctx.rc;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"n", [&](const std::string& v) { rc.n = to_ll("n", v); }},
      {"c", [&](const std::string& v) { rc.c = to_ll("c", v); }},
      {"field", [&](const std::string& v) { rc.field = v; }},
      {"hidden", [&](const std::string& v) { rc.hidden = v; }},
      {"bias", [&](const std::string& v) { rc.bias = to_bool("bias", v); }},
      {"eps", [&](const std::string& v) { rc.eps = to_double("eps", v); }},
      {"batch", [&](const std::string& v) { rc.batch = to_ll("batch", v); }},
      {"steps", [&](const std::string& v) { rc.steps = to_ll("steps", v); }},
      {"lr", [&](const std::string& v) { rc.lr = to_double("lr", v); }},
      {"schedule", [&](const std::string& v) { rc.schedule = v; }},
      {"seed",
       [&](const std::string& v) { rc.seed = static_cast<unsigned long long>(to_ll("seed", v)); }},
      {"integrator", [&](const std::string& v) { rc.integrator = v; }},
      {"integrator_steps",
       [&](const std::string& v) { rc.integrator_steps = to_ll("integrator_steps", v); }},
      {"mass", [&](const std::string& v) { rc.mass = to_double("mass", v); }},
      {"loglik_samples",
       [&](const std::string& v) { rc.loglik_samples = to_ll("loglik_samples", v); }},
      {"t_end", [&](const std::string& v) { rc.t_end = to_double("t_end", v); }},
      {"divergence", [&](const std::string& v) { rc.divergence = v; }},
      {"count", [&](const std::string& v) { rc.count = to_ll("count", v); }},
      {"dataset", [&](const std::string& v) { rc.dataset = v; }},
      {"checkpoint", [&](const std::string& v) { rc.checkpoint = v; }},
      {"out", [&](const std::string& v) { rc.out = v; }},
      {"trace", [&](const std::string& v) { rc.trace = v; }},
      {"configs", [&](const std::string& v) { rc.configs = v; }},
      {"samples", [&](const std::string& v) { rc.samples = v; }},
      {"ref_dataset", [&](const std::string& v) { rc.ref_dataset = v; }},
      {"ref_joint", [&](const std::string& v) { rc.ref_joint = v; }},
      {"target", [&](const std::string& v) { rc.target = v; }},
      {"joint", [&](const std::string& v) { rc.joint = v; }},
      {"histogram", [&](const std::string& v) { rc.histogram = v; }},
  };

  for (const auto& [key, value] : load_kv_config(ctx.rc.config_path)) {
    const auto setter = setters.find(key);
    if (setter == setters.end()) {
      throw FormatError("unknown config key '" + key + "'");
    }
    if (!ctx.provided.count(key)) {
      setter->second(value);
      ctx.provided.insert(key);
    }
  }
}

FieldSpec parse_field_spec(const RunConfig& rc) {
  FieldSpec spec;
  if (rc.field == "linear") {
    spec.kind = FieldKind::Linear;
  } else if (rc.field == "mlp") {
    spec.kind = FieldKind::Mlp;
  } else {
    throw std::invalid_argument("field must be 'linear' or 'mlp', got '" + rc.field + "'");
  }
  spec.bias = rc.bias;
  if (!rc.hidden.empty()) {
    if (spec.kind == FieldKind::Linear) {
      throw std::invalid_argument("the linear field takes no hidden layers");
    }
    std::string token;
    std::istringstream ss(rc.hidden);
    while (std::getline(ss, token, ',')) {
      spec.hidden.push_back(static_cast<Index>(to_ll("hidden", token)));
    }
  }
  if (spec.kind == FieldKind::Mlp && spec.hidden.empty()) {
    throw std::invalid_argument("the mlp field needs hidden widths, e.g. --hidden 64,64");
  }
  return spec;
}

LrSchedule parse_schedule(const std::string& name) {
  if (name == "constant") return LrSchedule::Constant;
  if (name == "cosine") return LrSchedule::Cosine;
  throw std::invalid_argument("schedule must be 'constant' or 'cosine', got '" + name + "'");
}

OdeScheme parse_scheme(const std::string& name) {
  if (name == "rk4") return OdeScheme::Rk4;
  if (name == "euler") return OdeScheme::Euler;
  throw std::invalid_argument("integrator must be 'rk4' or 'euler', got '" + name + "'");
}

DivergenceMode parse_divergence(const std::string& name) {
  if (name == "exact") return DivergenceMode::Exact;
  if (name == "fd") return DivergenceMode::FiniteDiff;
  if (name == "hutchinson") return DivergenceMode::Hutchinson;
  throw std::invalid_argument("divergence must be 'exact', 'fd' or 'hutchinson', got '" + name +
                              "'");
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw std::invalid_argument(std::string(flag) + " is required");
  }
}

IntegratorConfig resolve_integrator(const CommandContext& ctx, IntegratorConfig base) {
  if (ctx.provided.count("integrator")) base.scheme = parse_scheme(ctx.rc.integrator);
  if (ctx.provided.count("integrator_steps")) {
    base.steps = static_cast<Index>(ctx.rc.integrator_steps);
  }
  return base;
}

int cmd_train(CommandContext& ctx) {
  const RunConfig& rc = ctx.rc;
  require_path(rc.dataset, "--dataset");
  require_path(rc.checkpoint, "--checkpoint");

  Dataset data = load_dataset(rc.dataset);
  if (rc.n >= 0 && data.dims.n != static_cast<Index>(rc.n)) {
    throw DimsError("dataset has n=" + std::to_string(data.dims.n) + ", requested n=" +
                    std::to_string(rc.n));
  }
  if (rc.c >= 0 && data.dims.c != static_cast<Index>(rc.c)) {
    throw DimsError("dataset has c=" + std::to_string(data.dims.c) + ", requested c=" +
                    std::to_string(rc.c));
  }

  TrainConfig config;
  config.eps = rc.eps;
  config.batch = static_cast<Index>(rc.batch);
  config.steps = static_cast<Index>(rc.steps);
  config.lr = rc.lr;
  config.schedule = parse_schedule(rc.schedule);
  config.seed = rc.seed;
  config.field = parse_field_spec(rc);

  TrainResult result = train(make_empirical_sampler(data.configs), data.dims, config);

  Checkpoint checkpoint;
  checkpoint.params = std::move(result.params);
  checkpoint.eps = rc.eps;
  checkpoint.integrator.scheme = parse_scheme(rc.integrator);
  checkpoint.integrator.steps = static_cast<Index>(rc.integrator_steps);
  save_checkpoint(rc.checkpoint, checkpoint);

  const std::string trace_path = rc.trace.empty() ? rc.checkpoint + ".loss.csv" : rc.trace;
  write_loss_trace_csv(trace_path, result.loss_trace);

  std::cout << "checkpoint=" << rc.checkpoint << "\n";
  std::cout << "trace=" << trace_path << "\n";
  std::cout << "steps=" << result.loss_trace.size() << "\n";
  if (!result.loss_trace.empty()) {
    std::cout << "final_loss=" << std::setprecision(10) << result.loss_trace.back() << "\n";
  }
  return 0;
}

int cmd_sample(CommandContext& ctx) {
  const RunConfig& rc = ctx.rc;
  require_path(rc.checkpoint, "--checkpoint");
  require_path(rc.out, "--out");
  if (rc.count < 0) throw std::invalid_argument("--count is required (>= 0)");

  Checkpoint checkpoint = load_checkpoint(rc.checkpoint);
  const Dims dims = checkpoint.params.dims;

  if (rc.count == 0) {
    std::ofstream out(rc.out);
    if (!out) throw IoError("cannot open '" + rc.out + "' for writing");
    std::cout << "samples=" << rc.out << "\ncount=0\n";
    return 0;
  }

  const IntegratorConfig integrator = resolve_integrator(ctx, checkpoint.integrator);
  std::mt19937_64 rng(rc.seed);
  SampleStats stats;
  std::vector<Configuration> samples = sample_configurations(
      checkpoint.params, static_cast<Index>(rc.count), rng, integrator, &stats);
  save_dataset(rc.out, Dataset{dims, samples});

  std::cout << "samples=" << rc.out << "\n";
  std::cout << "count=" << samples.size() << "\n";
  std::cout << "argmax_ties=" << stats.argmax_ties << "\n";

  bool dense_ok = true;
  std::int64_t size = 0;
  try {
    size = joint_size(dims);
  } catch (const DimsError&) {
    dense_ok = false;
  }
  if (dense_ok) {
    const std::string hist_path = rc.histogram.empty() ? rc.out + ".hist.csv" : rc.histogram;
    Vec freq = empirical_joint(samples, dims);
    std::ofstream hist(hist_path);
    if (!hist) throw IoError("cannot open '" + hist_path + "' for writing");
    hist << "config_id,count,frequency\n" << std::setprecision(17);
    for (std::int64_t a = 0; a < size; ++a) {
      const auto count = static_cast<long long>(
          std::llround(freq[a] * static_cast<double>(samples.size())));
      hist << a << "," << count << "," << freq[a] << "\n";
    }
    std::cout << "histogram=" << hist_path << "\n";
  } else if (!rc.histogram.empty()) {
    throw DimsError("histogram requested but the joint exceeds the dense budget");
  }
  return 0;
}

int cmd_loglik(CommandContext& ctx) {
  const RunConfig& rc = ctx.rc;
  require_path(rc.checkpoint, "--checkpoint");
  require_path(rc.configs, "--configs");
  require_path(rc.out, "--out");
  if (rc.loglik_samples < 1) {
    throw std::invalid_argument("--loglik-samples must be >= 1");
  }

  Checkpoint checkpoint = load_checkpoint(rc.checkpoint);
  const Dims dims = checkpoint.params.dims;
  Dataset configs = load_dataset(rc.configs, /*allow_empty=*/true, dims);

  CnfConfig config;
  config.ode = resolve_integrator(ctx, checkpoint.integrator);
  config.divergence = parse_divergence(rc.divergence);
  config.t_end = rc.t_end;

  bool dense_ok = true;
  try {
    joint_size(dims);
  } catch (const DimsError&) {
    dense_ok = false;
  }

  std::ofstream out(rc.out);
  if (!out) throw IoError("cannot open '" + rc.out + "' for writing");
  out << "config_id,bound_nats,bound_bits_per_dim,n_samples,std_error\n"
      << std::setprecision(17);

  std::mt19937_64 rng(rc.seed);
  for (std::size_t row = 0; row < configs.configs.size(); ++row) {
    const Configuration& alpha = configs.configs[row];
    ISEstimate estimate =
        loglik_lower_bound(checkpoint.params, alpha, static_cast<Index>(rc.loglik_samples),
                           checkpoint.eps, rc.mass, config, rng);
    const std::int64_t id =
        dense_ok ? config_to_index(alpha, dims) : static_cast<std::int64_t>(row);
    out << id << "," << estimate.bound_nats << "," << estimate.bits_per_dim << ","
        << estimate.n_samples << "," << estimate.std_error << "\n";
    std::cout << "config_id=" << id << " bound_nats=" << std::setprecision(10)
              << estimate.bound_nats << " bits_per_dim=" << estimate.bits_per_dim
              << " std_error=" << estimate.std_error << "\n";
  }
  std::cout << "report=" << rc.out << "\n";
  return 0;
}

int cmd_eval(CommandContext& ctx) {
  const RunConfig& rc = ctx.rc;
  require_path(rc.samples, "--samples");
  if (rc.ref_dataset.empty() == rc.ref_joint.empty()) {
    throw std::invalid_argument("exactly one of --ref-dataset / --ref-joint is required");
  }

  Dims dims;
  Vec reference;
  if (!rc.ref_dataset.empty()) {
    Dataset ref = load_dataset(rc.ref_dataset);
    dims = ref.dims;
    reference = empirical_joint(ref.configs, dims);
  } else {
    JointFile joint = load_joint(rc.ref_joint);
    dims = joint.dims;
    reference = joint.probs;
  }

  Dataset samples = load_dataset(rc.samples, /*allow_empty=*/false, dims);
  Vec empirical = empirical_joint(samples.configs, dims);

  std::cout << std::setprecision(10);
  std::cout << "joint_tv=" << tv_distance(empirical, reference) << "\n";
  Mat marg_samples = marginalize(empirical, dims);
  Mat marg_reference = marginalize(reference, dims);
  for (Index i = 0; i < dims.n; ++i) {
    const double tv = 0.5 * (marg_samples.row(i) - marg_reference.row(i)).lpNorm<1>();
    std::cout << "marginal_tv_" << i << "=" << tv << "\n";
  }
  std::cout << "entropy_samples=" << entropy(empirical) << "\n";
  std::cout << "entropy_reference=" << entropy(reference) << "\n";
  return 0;
}

int cmd_synth(CommandContext& ctx) {
  const RunConfig& rc = ctx.rc;
  require_path(rc.out, "--out");
  if (rc.target.empty() == rc.joint.empty()) {
    throw std::invalid_argument("exactly one of --target / --joint is required");
  }
  if (rc.count < 0) throw std::invalid_argument("--count is required (>= 0)");

  Dims dims;
  Vec probs;
  if (!rc.target.empty()) {
    if (rc.target == "coupled-binaries" && rc.c >= 0 && rc.c != 2) {
      throw DimsError("coupled-binaries is a c=2 target");
    }
    const Index grid_c = rc.c >= 2 ? static_cast<Index>(rc.c) : 16;
    NamedTarget target = named_target(rc.target, grid_c);
    dims = target.dims;
    probs = target.probs;
  } else {
    JointFile joint = load_joint(rc.joint);
    dims = joint.dims;
    probs = joint.probs;
  }

  std::mt19937_64 rng(rc.seed);
  std::vector<Configuration> samples =
      sample_from_joint(probs, dims, static_cast<Index>(rc.count), rng);
  save_dataset(rc.out, Dataset{dims, samples});
  std::cout << "dataset=" << rc.out << "\n";
  std::cout << "count=" << samples.size() << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommandContext& ctx) {
  ctx.options["config"] =
      cmd->add_option("--config", ctx.rc.config_path, "Flat key = value run-config file");
  ctx.options["seed"] = cmd->add_option("--seed", ctx.rc.seed, "RNG seed");
}

void add_integrator(CLI::App* cmd, CommandContext& ctx) {
  ctx.options["integrator"] =
      cmd->add_option("--integrator", ctx.rc.integrator, "ODE scheme: rk4 or euler");
  ctx.options["integrator_steps"] =
      cmd->add_option("--integrator-steps", ctx.rc.integrator_steps, "Fixed step count");
}

int run(int argc, char** argv) {
  CLI::App app{"Generative modeling of discrete joint distributions by geodesic flow matching"};
  app.require_subcommand(1);

  CommandContext train_ctx;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit a flow to a dataset");
  add_common(train_cmd, train_ctx);
  add_integrator(train_cmd, train_ctx);
  train_ctx.options["dataset"] =
      train_cmd->add_option("--dataset", train_ctx.rc.dataset, "Training dataset path");
  train_ctx.options["checkpoint"] =
      train_cmd->add_option("--checkpoint", train_ctx.rc.checkpoint, "Output checkpoint path");
  train_ctx.options["trace"] =
      train_cmd->add_option("--trace", train_ctx.rc.trace, "Loss trace CSV path");
  train_ctx.options["n"] = train_cmd->add_option("--n", train_ctx.rc.n, "Expected variable count");
  train_ctx.options["c"] = train_cmd->add_option("--c", train_ctx.rc.c, "Expected category count");
  train_ctx.options["field"] =
      train_cmd->add_option("--field", train_ctx.rc.field, "Field variant: linear or mlp");
  train_ctx.options["hidden"] =
      train_cmd->add_option("--hidden", train_ctx.rc.hidden, "MLP hidden widths, e.g. 64,64");
  train_ctx.options["bias"] =
      train_cmd->add_flag("--bias", train_ctx.rc.bias, "Enable the linear field's bias");
  train_ctx.options["eps"] =
      train_cmd->add_option("--eps", train_ctx.rc.eps, "Corner smoothing in (0, 1)");
  train_ctx.options["batch"] = train_cmd->add_option("--batch", train_ctx.rc.batch, "Batch size");
  train_ctx.options["steps"] =
      train_cmd->add_option("--steps", train_ctx.rc.steps, "Optimizer steps");
  train_ctx.options["lr"] = train_cmd->add_option("--lr", train_ctx.rc.lr, "Adam learning rate");
  train_ctx.options["schedule"] =
      train_cmd->add_option("--schedule", train_ctx.rc.schedule, "constant or cosine");

  CommandContext sample_ctx;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Draw configurations from a checkpoint");
  add_common(sample_cmd, sample_ctx);
  add_integrator(sample_cmd, sample_ctx);
  sample_ctx.options["checkpoint"] =
      sample_cmd->add_option("--checkpoint", sample_ctx.rc.checkpoint, "Checkpoint path");
  sample_ctx.options["out"] =
      sample_cmd->add_option("--out", sample_ctx.rc.out, "Output samples path");
  sample_ctx.options["count"] =
      sample_cmd->add_option("--count", sample_ctx.rc.count, "Number of samples");
  sample_ctx.options["histogram"] = sample_cmd->add_option(
      "--histogram", sample_ctx.rc.histogram, "Dense histogram CSV path override");

  CommandContext loglik_ctx;
  CLI::App* loglik_cmd =
      app.add_subcommand("loglik", "Importance-sampling log-likelihood lower bounds");
  add_common(loglik_cmd, loglik_ctx);
  add_integrator(loglik_cmd, loglik_ctx);
  loglik_ctx.options["checkpoint"] =
      loglik_cmd->add_option("--checkpoint", loglik_ctx.rc.checkpoint, "Checkpoint path");
  loglik_ctx.options["configs"] = loglik_cmd->add_option(
      "--configs", loglik_ctx.rc.configs, "Configurations file (one per line)");
  loglik_ctx.options["out"] =
      loglik_cmd->add_option("--out", loglik_ctx.rc.out, "Report CSV path");
  loglik_ctx.options["loglik_samples"] = loglik_cmd->add_option(
      "--loglik-samples", loglik_ctx.rc.loglik_samples, "Importance samples per configuration");
  loglik_ctx.options["mass"] =
      loglik_cmd->add_option("--mass", loglik_ctx.rc.mass, "Proposal ball mass in (0, 1)");
  loglik_ctx.options["t_end"] =
      loglik_cmd->add_option("--t-end", loglik_ctx.rc.t_end, "Flow endpoint time");
  loglik_ctx.options["divergence"] = loglik_cmd->add_option(
      "--divergence", loglik_ctx.rc.divergence, "exact, fd or hutchinson");

  CommandContext eval_ctx;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Compare samples against a reference");
  add_common(eval_cmd, eval_ctx);
  eval_ctx.options["samples"] =
      eval_cmd->add_option("--samples", eval_ctx.rc.samples, "Samples path");
  eval_ctx.options["ref_dataset"] =
      eval_cmd->add_option("--ref-dataset", eval_ctx.rc.ref_dataset, "Reference dataset path");
  eval_ctx.options["ref_joint"] =
      eval_cmd->add_option("--ref-joint", eval_ctx.rc.ref_joint, "Reference joint file path");

  CommandContext synth_ctx;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Sample a dataset from a known joint");
  add_common(synth_cmd, synth_ctx);
  synth_ctx.options["target"] = synth_cmd->add_option(
      "--target", synth_ctx.rc.target, "coupled-binaries, gaussian-mixture or pinwheel");
  synth_ctx.options["joint"] =
      synth_cmd->add_option("--joint", synth_ctx.rc.joint, "Joint distribution file");
  synth_ctx.options["c"] =
      synth_cmd->add_option("--c", synth_ctx.rc.c, "Grid resolution for image-like targets");
  synth_ctx.options["count"] =
      synth_cmd->add_option("--count", synth_ctx.rc.count, "Number of samples");
  synth_ctx.options["out"] =
      synth_cmd->add_option("--out", synth_ctx.rc.out, "Output dataset path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (train_cmd->parsed()) {
    apply_config(train_ctx);
    return cmd_train(train_ctx);
  }
  if (sample_cmd->parsed()) {
    apply_config(sample_ctx);
    return cmd_sample(sample_ctx);
  }
  if (loglik_cmd->parsed()) {
    apply_config(loglik_ctx);
    return cmd_loglik(loglik_ctx);
  }
  if (eval_cmd->parsed()) {
    apply_config(eval_ctx);
    return cmd_eval(eval_ctx);
  }
  if (synth_cmd->parsed()) {
    apply_config(synth_ctx);
    return cmd_synth(synth_ctx);
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("ASSIGNFLOW_THREADS")) {
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  }
  try {
    return run(argc, argv);
  } catch (const assignflow::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const assignflow::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const assignflow::DimsError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 5;
  } catch (const assignflow::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 6;
  } catch (const assignflow::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 7;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
