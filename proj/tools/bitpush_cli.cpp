// Benchmark front end: single runs, parameter sweeps, data-file checks and
// privacy metering over the estimation methods in the library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bitpush/experiment.hpp"

namespace {

using namespace bitpush;

struct CommonFlags {
  std::string method = "adaptive";
  std::string task = "mean";
  std::string variance_method = "case1";
  std::string dist = "normal";
  double mu = 350.0;
  double sigma = 50.0;
  double low = 0.0;
  double high = 1023.0;
  double rate = 1.0;
  std::string file;
  std::string column = "0";
  std::int64_t n = 10000;
  int bits = 10;
  int reps = 100;
  std::uint64_t seed = 42;
  std::uint64_t pop_seed = 0;
  bool pop_seed_set = false;
  double epsilon = 0.0;
  bool epsilon_set = false;
  double delta = 1.0 / 3.0;
  double gamma = 0.5;
  double alpha = 0.0;
  bool alpha_set = false;
  bool no_caching = false;
  double squash_k = 0.0;
  bool squash_k_set = false;
  int b_send = 1;
  int threads = 0;
  bool meter = false;
  std::string out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--method", f.method,
                  "basic|weighted|adaptive|laplace|rounding|dithering|"
                  "piecewise|oracle")
      ->capture_default_str();
  cmd->add_option("--task", f.task, "mean|variance|geomean")
      ->capture_default_str();
  cmd->add_option("--var-method", f.variance_method,
                  "case1 (centered square) | case2 (square minus squared mean)")
      ->capture_default_str();
  cmd->add_option("--dist", f.dist, "normal|uniform|exponential|file")
      ->capture_default_str();
  cmd->add_option("--mu", f.mu, "normal mean")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "normal standard deviation")
      ->capture_default_str();
  cmd->add_option("--low", f.low, "uniform lower bound")->capture_default_str();
  cmd->add_option("--high", f.high, "uniform upper bound")
      ->capture_default_str();
  cmd->add_option("--rate", f.rate, "exponential rate")->capture_default_str();
  cmd->add_option("--file", f.file, "input data file (--dist file)");
  cmd->add_option("--column", f.column,
                  "data column, by header name or zero-based index")
      ->capture_default_str();
  cmd->add_option("--n", f.n, "number of simulated clients")
      ->capture_default_str();
  cmd->add_option("--bits", f.bits, "bit depth b")->capture_default_str();
  cmd->add_option("--reps", f.reps, "independent repetitions")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
  cmd->add_option("--pop-seed", f.pop_seed,
                  "population seed (defaults to a value derived from --seed)")
      ->each([&f](const std::string&) { f.pop_seed_set = true; });
  cmd->add_option("--epsilon", f.epsilon,
                  "local differential privacy parameter; enables DP")
      ->each([&f](const std::string&) { f.epsilon_set = true; });
  cmd->add_option("--delta", f.delta, "round-1 client fraction (adaptive)")
      ->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "round-1 weight exponent (adaptive)")
      ->capture_default_str();
  cmd->add_option("--alpha", f.alpha,
                  "score exponent (default 1.0 adaptive, 0.5 weighted)")
      ->each([&f](const std::string&) { f.alpha_set = true; });
  cmd->add_flag("--no-caching", f.no_caching,
                "round 2 alone produces the adaptive estimate");
  cmd->add_option("--squash-k", f.squash_k,
                  "bit-squashing threshold multiplier (default 3 under DP)")
      ->each([&f](const std::string&) { f.squash_k_set = true; });
  cmd->add_option("--b-send", f.b_send, "distinct bits sent per client")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker cap (0 = hardware)")
      ->capture_default_str();
  cmd->add_flag("--meter", f.meter,
                "report fractional private bits alongside results");
  cmd->add_option("--out", f.out, "output CSV path (default: stdout)");
}

ExperimentSpec to_spec(const CommonFlags& f) {
  ExperimentSpec spec;
  spec.method = parse_method(f.method);
  spec.task = parse_task(f.task);
  if (f.variance_method == "case1") {
    spec.variance_method = VarianceMethod::CenteredSquare;
  } else if (f.variance_method == "case2") {
    spec.variance_method = VarianceMethod::SquareMinusSquaredMean;
  } else {
    throw std::invalid_argument("--var-method must be case1 or case2");
  }

  if (f.dist == "normal") {
    spec.population.dist = Distribution::Normal;
  } else if (f.dist == "uniform") {
    spec.population.dist = Distribution::Uniform;
  } else if (f.dist == "exponential") {
    spec.population.dist = Distribution::Exponential;
  } else if (f.dist == "file") {
    spec.population.dist = Distribution::FromFile;
    if (f.file.empty()) {
      throw std::invalid_argument("--dist file needs --file");
    }
  } else {
    throw std::invalid_argument("unknown --dist '" + f.dist + "'");
  }
  spec.population.mu = f.mu;
  spec.population.sigma = f.sigma;
  spec.population.low = f.low;
  spec.population.high = f.high;
  spec.population.rate = f.rate;
  spec.population.path = f.file;
  spec.population.column = f.column;
  spec.population.n = f.n;
  if (f.pop_seed_set) spec.population.seed = f.pop_seed;

  spec.config.bits = f.bits;
  spec.config.clients = f.n;
  spec.config.delta = f.delta;
  spec.config.gamma = f.gamma;
  if (f.alpha_set) spec.config.alpha = f.alpha;
  if (f.epsilon_set) {
    if (!(f.epsilon > 0.0)) {
      throw std::invalid_argument("--epsilon must be > 0");
    }
    spec.config.epsilon = f.epsilon;
  }
  spec.config.caching = !f.no_caching;
  if (f.squash_k_set) spec.config.squash_k = f.squash_k;
  spec.config.b_send = f.b_send;

  spec.repetitions = f.reps;
  spec.master_seed = f.seed;
  spec.threads = f.threads;
  return spec;
}

void emit(const std::string& csv, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file " + out_path);
  out << csv;
}

void print_meter(const ExperimentSpec& spec) {
  const PrivacyMeter meter = meter_one_run(spec);
  std::fprintf(stderr,
               "meter: clients=%zu total_private_bits=%.6g per_client=%.6g\n",
               meter.per_client().size(), meter.total(),
               meter.per_client_average());
}

void warn_clipped(const ExperimentResult& result) {
  if (result.clipped > 0) {
    std::fprintf(stderr, "note: %lld values clipped to the %d-bit range\n",
                 static_cast<long long>(result.clipped), result.bits);
  }
  if (!result.normalized) {
    std::fprintf(stderr,
                 "note: target is zero, nrmse column holds unnormalized rmse\n");
  }
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(item);
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bitpush: distributed mean estimation benchmarks where each client "
      "discloses a single bit of its value"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "one experiment, one CSV row");
  add_common_flags(run, run_flags);

  CommonFlags sweep_flags;
  std::string sweep_param;
  std::string sweep_values;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "one CSV row per parameter value");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd
      ->add_option("--param", sweep_param,
                   "gamma|delta|alpha|mu|bits|n|epsilon|squash_k|method")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required();

  std::string ingest_file;
  std::string ingest_column = "0";
  CLI::App* ingest =
      app.add_subcommand("ingest-check", "parse a data file and report on it");
  ingest->add_option("--file", ingest_file, "input file")->required();
  ingest->add_option("--column", ingest_column, "column name or index")
      ->capture_default_str();

  CommonFlags meter_flags;
  CLI::App* meter_cmd = app.add_subcommand(
      "meter-report", "fractional private bits disclosed by one run");
  add_common_flags(meter_cmd, meter_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const ExperimentSpec spec = to_spec(run_flags);
      const ExperimentResult result = run_experiment(spec);
      warn_clipped(result);
      emit(to_csv({result}), run_flags.out);
      if (run_flags.meter) print_meter(spec);
    } else if (sweep_cmd->parsed()) {
      const ExperimentSpec base = to_spec(sweep_flags);
      const auto results = sweep(base, sweep_param, split_values(sweep_values));
      for (const auto& r : results) warn_clipped(r);
      emit(to_csv(results), sweep_flags.out);
    } else if (ingest->parsed()) {
      const Population pop = load_csv_column(ingest_file, ingest_column);
      double lo = pop.values.front();
      double hi = pop.values.front();
      double sum = 0.0;
      for (double v : pop.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
      std::printf("rows=%zu skipped=%lld min=%.6g max=%.6g mean=%.6g\n",
                  pop.values.size(),
                  static_cast<long long>(pop.malformed_rows), lo, hi,
                  sum / static_cast<double>(pop.values.size()));
    } else if (meter_cmd->parsed()) {
      print_meter(to_spec(meter_flags));
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
