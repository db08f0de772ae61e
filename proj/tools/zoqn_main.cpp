// Experiment runner for the zeroth-order quasi-Newton toolkit.
//
// Subcommands:
//   run            multi-seed solver runs, per-seed traces + aggregate bands
//   tune-baseline  step-length grid search for the fd-sg / ss-sg baselines
//   reference      noise-free reference optimum for a problem
//   verify         oracle and property battery
//
// Exit codes: 0 success, 2 validation error, 1 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracles.hpp"
#include "zoqn/solver.hpp"
#include "zoqn/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zoqn;

namespace {

struct RunOptions {
  std::string problem;
  std::string noise = "abs";
  double sigma = 1e-3;
  std::string method = "fd-ipqn";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t instance_seed = 0;  // l1rand instance construction

  // Solver overrides; negative gamma means "apply the sigma rule".
  double theta0 = 0.9;
  double gamma = -1.0;
  double nu = 1e-8;
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 1e-14;
  double tau = 0.5;
  double alpha_min = -1.0;  // default: 1e-8 on l1rand, 0 otherwise
  double beta1 = 1e-3;
  double beta2 = 0.0;
  std::uint64_t initial_size = 2;
  std::uint64_t cap = 10000;
  std::uint64_t max_evals = 500000;
  std::uint64_t max_iters = 10000;
  double gap_tolerance = 0.0;
  double alpha0 = 0.0;  // fixed step for the baselines
  std::uint64_t batch = 2;
  int directions = 5;
  int workers = 0;
};

NoiseModel parse_noise(const std::string& name) {
  if (name == "abs") return NoiseModel::Abs;
  if (name == "rel") return NoiseModel::Rel;
  if (name == "l1") return NoiseModel::UniformL1;
  throw CLI::ValidationError("--noise", "unknown noise model: " + name);
}

double effective_gamma(const RunOptions& opt, bool is_l1) {
  if (opt.gamma > 0.0) return opt.gamma;
  // Larger-variance settings shrink the threshold faster.
  if (is_l1 || opt.sigma >= 1e-4) return 0.9;
  return 0.99;
}

ProblemSpec build_spec(const RunOptions& opt) {
  if (opt.problem == "l1rand") {
    if (opt.noise != "l1") {
      throw CLI::ValidationError("--noise", "l1rand requires --noise l1");
    }
    return make_nonsmooth_instance(opt.instance_seed, 50, 50);
  }
  if (opt.noise == "l1") {
    throw CLI::ValidationError("--noise", "uniform-l1 noise only fits l1rand");
  }
  if (!is_registered_problem(opt.problem)) {
    throw CLI::ValidationError("--problem", "unknown problem: " + opt.problem);
  }
  if (!(opt.sigma > 0.0)) {
    throw CLI::ValidationError("--sigma", "sigma must be positive");
  }
  return make_problem(opt.problem, parse_noise(opt.noise), opt.sigma);
}

SolverConfig build_config(const RunOptions& opt, bool is_l1, std::uint64_t seed) {
  SolverConfig config;
  config.policy.kind =
      opt.method == "fd-norm" ? SampleTestKind::Norm : SampleTestKind::Ipqn;
  config.policy.initial_size = opt.initial_size;
  config.policy.cap = opt.cap;
  config.theta0 = opt.theta0;
  config.gamma = effective_gamma(opt, is_l1);
  config.nu = opt.nu;
  config.memory = opt.memory;
  config.linesearch.c1 = opt.c1;
  config.linesearch.c2 = opt.c2;
  config.linesearch.tau = opt.tau;
  config.linesearch.alpha_min =
      opt.alpha_min >= 0.0 ? opt.alpha_min : (is_l1 ? 1e-8 : 0.0);
  config.beta1 = opt.beta1;
  config.beta2 = opt.beta2;
  config.mode = is_l1 ? CurvatureMode::Nonsmooth : CurvatureMode::Smooth;
  config.budgets.max_evals = opt.max_evals;
  config.budgets.max_iters = opt.max_iters;
  config.run_seed = seed;
  config.gap_tolerance = opt.gap_tolerance;
  return config;
}

// Reference optima are cached on disk when ZOQN_CACHE_DIR is set.
std::optional<fs::path> cache_path(const ProblemSpec& spec) {
  const char* dir = std::getenv("ZOQN_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  std::ostringstream name;
  name << "ref_" << spec.name;
  if (spec.noise == NoiseModel::UniformL1) name << "_d" << spec.d;
  name << ".json";
  return fs::path(dir) / name.str();
}

ReferenceOptimum reference_with_cache(const ProblemSpec& spec) {
  const auto path = cache_path(spec);
  if (path && fs::exists(*path)) {
    std::ifstream in(*path);
    json j;
    in >> j;
    ReferenceOptimum ref;
    ref.fstar = j.at("fstar").get<double>();
    ref.tolerance_met = j.at("tolerance_met").get<bool>();
    ref.evals = j.at("evals").get<std::uint64_t>();
    const auto& xs = j.at("x_ref");
    ref.x_ref.resize(static_cast<Eigen::Index>(xs.size()));
    for (Eigen::Index i = 0; i < ref.x_ref.size(); ++i) ref.x_ref(i) = xs[i];
    return ref;
  }
  const ReferenceOptimum ref = compute_reference_optimum(spec);
  if (path) {
    fs::create_directories(path->parent_path());
    json j;
    j["fstar"] = ref.fstar;
    j["tolerance_met"] = ref.tolerance_met;
    j["evals"] = ref.evals;
    j["x_ref"] = std::vector<double>(ref.x_ref.data(),
                                     ref.x_ref.data() + ref.x_ref.size());
    std::ofstream out(*path);
    out << j.dump(2) << '\n';
  }
  return ref;
}

void show_config(const RunOptions& opt, bool is_l1) {
  std::cout << "theta0 = " << opt.theta0 << '\n'
            << "initial_size = " << opt.initial_size << '\n'
            << "nu = " << opt.nu << '\n'
            << "memory = " << opt.memory << '\n'
            << "c1 = " << opt.c1 << '\n'
            << "c2 = " << opt.c2 << '\n'
            << "tau = " << opt.tau << '\n'
            << "beta1 = " << opt.beta1 << '\n'
            << "beta2 = " << opt.beta2 << '\n'
            << "gamma = " << effective_gamma(opt, is_l1) << '\n'
            << "alpha_min = "
            << (opt.alpha_min >= 0.0 ? opt.alpha_min : (is_l1 ? 1e-8 : 0.0))
            << '\n'
            << "cap = " << opt.cap << '\n'
            << "max_evals = " << opt.max_evals << '\n'
            << "max_iters = " << opt.max_iters << '\n'
            << "batch = " << opt.batch << '\n'
            << "directions = " << opt.directions << '\n';
}

// JSON config file: keys mirror the long option names; command-line flags
// take precedence over file values.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  for (const auto& [key, value] : j.items()) {
    CLI::Option* option = cmd->get_option_no_throw("--" + key);
    if (option == nullptr) {
      throw CLI::ValidationError("--config", "unknown key: " + key);
    }
    if (option->count() > 0) continue;  // explicit flag wins
    if (value.is_array()) {
      std::vector<std::string> parts;
      for (const auto& v : value) parts.push_back(v.dump());
      option->add_result(CLI::detail::join(parts, ","));
    } else if (value.is_string()) {
      option->add_result(value.get<std::string>());
    } else {
      option->add_result(value.dump());
    }
    option->run_callback();
  }
}

void add_common_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--problem", opt.problem, "problem name")->required();
  cmd->add_option("--noise", opt.noise, "noise model: abs, rel, l1");
  cmd->add_option("--sigma", opt.sigma, "noise scale for abs/rel");
  cmd->add_option("--seeds", opt.seeds, "run seeds")->delimiter(',');
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--instance-seed", opt.instance_seed, "l1rand instance seed");
  cmd->add_option("--theta0", opt.theta0, "initial test threshold");
  cmd->add_option("--gamma", opt.gamma, "theta shrink factor");
  cmd->add_option("--nu", opt.nu, "finite-difference parameter");
  cmd->add_option("--memory", opt.memory, "quasi-newton memory");
  cmd->add_option("--c1", opt.c1, "sufficient-decrease slope factor");
  cmd->add_option("--c2", opt.c2, "sufficient-decrease slack");
  cmd->add_option("--tau", opt.tau, "backtracking factor");
  cmd->add_option("--alpha-min", opt.alpha_min, "nonsmooth step safeguard");
  cmd->add_option("--beta1", opt.beta1, "curvature acceptance constant");
  cmd->add_option("--beta2", opt.beta2, "lengthening constant");
  cmd->add_option("--s0", opt.initial_size, "initial sample size");
  cmd->add_option("--cap", opt.cap, "sample size cap");
  cmd->add_option("--max-evals", opt.max_evals, "evaluation budget");
  cmd->add_option("--max-iters", opt.max_iters, "iteration budget");
  cmd->add_option("--gap-tol", opt.gap_tolerance, "stop when gap falls below");
  cmd->add_option("--batch", opt.batch, "baseline batch size");
  cmd->add_option("--alpha0", opt.alpha0, "baseline fixed step length");
  cmd->add_option("--directions", opt.directions, "ss-sg directions per sample");
  cmd->add_option("--workers", opt.workers, "parallel worker count");
}

std::string trace_filename(const RunOptions& opt, std::uint64_t seed) {
  std::ostringstream name;
  name << opt.problem << '_' << opt.noise << '_' << opt.method << "_seed" << seed
       << (opt.format == "json" ? ".json" : ".csv");
  return name.str();
}

int do_run(const RunOptions& opt) {
  const ProblemSpec spec = build_spec(opt);
  const bool is_l1 = spec.noise == NoiseModel::UniformL1;
  const ReferenceOptimum ref = reference_with_cache(spec);

  const bool baseline = opt.method == "fd-sg" || opt.method == "ss-sg";
  if (baseline && !(opt.alpha0 > 0.0)) {
    throw CLI::ValidationError("--alpha0",
                               "baseline methods need a positive step length");
  }

  std::vector<RunRecord> records(opt.seeds.size());
  std::vector<std::future<void>> futures;
  for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      const std::uint64_t seed = opt.seeds[i];
      if (opt.method == "fd-sg") {
        Budgets budgets{opt.max_evals, opt.max_iters};
        records[i] = run_fd_sg(spec, opt.alpha0, opt.batch, opt.nu, budgets,
                               seed, ref.fstar);
      } else if (opt.method == "ss-sg") {
        Budgets budgets{opt.max_evals, opt.max_iters};
        records[i] = run_ss_sg(spec, opt.alpha0, opt.batch, opt.nu,
                               opt.directions, budgets, seed, ref.fstar);
      } else {
        records[i] = run_fd_lbfgs(spec, build_config(opt, is_l1, seed), ref.fstar);
      }
    }));
  }
  for (auto& f : futures) f.get();

  fs::create_directories(opt.out_dir);
  const TraceFormat fmt =
      opt.format == "json" ? TraceFormat::Json : TraceFormat::Csv;
  for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
    const fs::path path = fs::path(opt.out_dir) / trace_filename(opt, opt.seeds[i]);
    write_trace(records[i], path.string(), fmt);
    std::cout << "wrote " << path.string() << " (" << records[i].rows.size()
              << " rows, status " << to_string(records[i].status) << ")\n";
  }

  std::ostringstream agg_name;
  agg_name << opt.problem << '_' << opt.noise << '_' << opt.method
           << "_aggregate.csv";
  const fs::path agg_path = fs::path(opt.out_dir) / agg_name.str();
  write_aggregate(aggregate_traces(records, opt.max_evals), agg_path.string());
  std::cout << "wrote " << agg_path.string() << " (F* = "
            << format_double(ref.fstar) << ")\n";
  return 0;
}

int do_tune(const RunOptions& opt, int jmin, int jmax) {
  if (opt.method != "fd-sg" && opt.method != "ss-sg") {
    throw CLI::ValidationError("--method", "tune-baseline expects fd-sg or ss-sg");
  }
  if (jmin > jmax) throw CLI::ValidationError("--jmin", "jmin exceeds jmax");
  const ProblemSpec spec = build_spec(opt);
  const ReferenceOptimum ref = reference_with_cache(spec);
  std::vector<int> grid;
  for (int j = jmin; j <= jmax; ++j) grid.push_back(j);
  Budgets budgets{opt.max_evals, opt.max_iters};
  const TuneResult result = tune_baseline(
      spec, opt.method == "fd-sg" ? BaselineMethod::FdSg : BaselineMethod::SsSg,
      grid, opt.seeds, budgets, ref.fstar, opt.batch, opt.nu, opt.directions,
      opt.workers);

  std::cout << "best alpha0 = 2^" << result.best_exponent << " = "
            << format_double(result.best_alpha0) << '\n'
            << "mean final gap = " << format_double(result.best_mean_final_gap)
            << '\n';

  fs::create_directories(opt.out_dir);
  const TraceFormat fmt =
      opt.format == "json" ? TraceFormat::Json : TraceFormat::Csv;
  for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
    std::ostringstream name;
    name << opt.problem << '_' << opt.noise << '_' << opt.method << "_tuned_seed"
         << opt.seeds[i] << (opt.format == "json" ? ".json" : ".csv");
    const fs::path path = fs::path(opt.out_dir) / name.str();
    write_trace(result.best_records[i], path.string(), fmt);
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

int do_reference(const std::string& problem, std::uint64_t seed) {
  ProblemSpec spec;
  if (problem == "l1rand") {
    spec = make_nonsmooth_instance(seed, 50, 50);
  } else {
    if (!is_registered_problem(problem)) {
      throw CLI::ValidationError("--problem", "unknown problem: " + problem);
    }
    // Noise model is irrelevant for the noise-free reference solve.
    spec = make_problem(problem, NoiseModel::Abs, 1e-3);
  }
  const ReferenceOptimum ref = reference_with_cache(spec);
  std::cout << format_double(ref.fstar) << '\n';
  std::cerr << "evals = " << ref.evals
            << ", tolerance_met = " << (ref.tolerance_met ? "true" : "false")
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeroth-order adaptive-sampling quasi-Newton experiment runner"};
  app.require_subcommand(1);

  RunOptions opt;
  std::string config_path;
  std::string format = "csv";
  bool show = false;

  CLI::App* run_cmd = app.add_subcommand("run", "execute multi-seed solver runs");
  add_common_options(run_cmd, opt);
  run_cmd->add_option("--method", opt.method,
                      "fd-norm, fd-ipqn, fd-sg, or ss-sg");
  run_cmd->add_option("--format", format, "trace format: csv or json");
  run_cmd->add_option("--config", config_path, "JSON file with option defaults");
  run_cmd->add_flag("--show-config", show, "print effective defaults and exit");

  RunOptions tune_opt;
  int jmin = -20, jmax = 10;
  CLI::App* tune_cmd =
      app.add_subcommand("tune-baseline", "grid-search a baseline step length");
  add_common_options(tune_cmd, tune_opt);
  tune_cmd->add_option("--method", tune_opt.method, "fd-sg or ss-sg");
  tune_cmd->add_option("--format", format, "trace format: csv or json");
  tune_cmd->add_option("--jmin", jmin, "smallest exponent in the 2^j grid");
  tune_cmd->add_option("--jmax", jmax, "largest exponent in the 2^j grid");

  std::string ref_problem;
  std::uint64_t ref_seed = 0;
  CLI::App* ref_cmd =
      app.add_subcommand("reference", "print the noise-free reference optimum");
  ref_cmd->add_option("--problem", ref_problem, "problem name")->required();
  ref_cmd->add_option("--seed", ref_seed, "l1rand instance seed");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the oracle/property battery");

  try {
    app.parse(argc, argv);

    if (run_cmd->parsed()) {
      if (!config_path.empty()) apply_config_file(run_cmd, config_path);
      opt.format = format;
      if (opt.method != "fd-norm" && opt.method != "fd-ipqn" &&
          opt.method != "fd-sg" && opt.method != "ss-sg") {
        throw CLI::ValidationError("--method", "unknown method: " + opt.method);
      }
      if (opt.seeds.empty()) {
        throw CLI::ValidationError("--seeds", "at least one seed is required");
      }
      if (show) {
        show_config(opt, opt.problem == "l1rand");
        return 0;
      }
      return do_run(opt);
    }
    if (tune_cmd->parsed()) {
      tune_opt.format = format;
      return do_tune(tune_opt, jmin, jmax);
    }
    if (ref_cmd->parsed()) {
      return do_reference(ref_problem, ref_seed);
    }
    if (verify_cmd->parsed()) {
      return zoqn::oracles::run_verification_suite(std::cout) ? 0 : 1;
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
