#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bitpush/experiment.hpp"
#include "doctest.h"

using namespace bitpush;

namespace {

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  return path;
}

// Strips the wall-time column, the only field that may differ between two
// identical runs.
std::string without_wall_time(const std::string& csv) {
  std::string out;
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line)) {
    const auto cut = line.rfind(',');
    out += line.substr(0, cut);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("generated populations are deterministic and in range") {
  PopulationSpec spec;
  spec.dist = Distribution::Normal;
  spec.mu = 350.0;
  spec.sigma = 50.0;
  spec.n = 10000;
  const Population a = generate(spec, 42);
  const Population b = generate(spec, 42);
  CHECK(a.values == b.values);
  double mean = 0.0;
  for (double v : a.values) mean += v;
  mean /= static_cast<double>(a.values.size());
  CHECK(std::abs(mean - 350.0) <= 3.0 * 50.0 / std::sqrt(10000.0));

  spec.dist = Distribution::Uniform;
  spec.low = 0.0;
  spec.high = 1023.0;
  for (double v : generate(spec, 7).values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1023.0);
  }
}

TEST_CASE("file ingestion by name and by index") {
  const auto path = write_temp("bitpush_ages.csv", "age,city\n20,x\n30,y\n40,z\n");
  const Population by_name = load_csv_column(path.string(), "age");
  CHECK(by_name.values == std::vector<double>{20.0, 30.0, 40.0});
  CHECK(by_name.malformed_rows == 0);

  const Population by_index = load_csv_column(path.string(), "0");
  CHECK(by_index.values == std::vector<double>{20.0, 30.0, 40.0});

  const auto headerless = write_temp("bitpush_plain.csv", "5\n6\n7\n");
  CHECK(load_csv_column(headerless.string(), "0").values ==
        std::vector<double>{5.0, 6.0, 7.0});
}

TEST_CASE("malformed rows are skipped and counted") {
  const auto path = write_temp("bitpush_dirty.csv",
                               "age\n20\nnot_a_number\n30\n\n40\n,\n");
  const Population pop = load_csv_column(path.string(), "age");
  CHECK(pop.values == std::vector<double>{20.0, 30.0, 40.0});
  CHECK(pop.malformed_rows == 2);
}

TEST_CASE("ingestion failure modes") {
  CHECK_THROWS_AS(load_csv_column("/nonexistent/file.csv", "age"),
                  std::runtime_error);
  const auto path = write_temp("bitpush_cols.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(load_csv_column(path.string(), "missing"),
                  std::runtime_error);
  const auto empty = write_temp("bitpush_nonnumeric.csv", "a\nx\ny\n");
  CHECK_THROWS_AS(load_csv_column(empty.string(), "a"), std::runtime_error);
}

TEST_CASE("the repository fixture parses") {
  const Population ages = load_csv_column(std::string(TEST_DATA_DIR) + "/ages_sample.csv", "age");
  CHECK(ages.values.size() == 40);
  CHECK(ages.malformed_rows == 0);
  CHECK(ages.values.front() == doctest::Approx(73.0));
}

TEST_CASE("oracle method has zero error") {
  ExperimentSpec spec;
  spec.method = Method::Oracle;
  spec.repetitions = 10;
  spec.population.n = 1000;
  const ExperimentResult result = run_experiment(spec);
  CHECK(result.nrmse == doctest::Approx(0.0));
  CHECK(result.std_error == doctest::Approx(0.0));
  CHECK(result.normalized);
}

TEST_CASE("adaptive headline run lands in the expected band") {
  ExperimentSpec spec;
  spec.method = Method::Adaptive;
  spec.repetitions = 100;
  spec.master_seed = 42;
  const ExperimentResult result = run_experiment(spec);
  CHECK(result.nrmse > 0.0);
  CHECK(result.nrmse < 0.05);
  CHECK(result.n == 10000);
}

TEST_CASE("standard error shrinks with more repetitions") {
  ExperimentSpec spec;
  spec.method = Method::Weighted;
  spec.population.n = 2000;
  spec.master_seed = 9;
  spec.repetitions = 100;
  const double se_small = run_experiment(spec).std_error;
  spec.repetitions = 400;
  const double se_large = run_experiment(spec).std_error;
  CHECK(se_large < se_small);
}

TEST_CASE("identical specs give identical results modulo wall time") {
  ExperimentSpec spec;
  spec.method = Method::Adaptive;
  spec.config.epsilon = 2.0;
  spec.repetitions = 20;
  spec.population.n = 2000;
  spec.threads = 2;
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  CHECK(a.nrmse == b.nrmse);  // bitwise, not approximate
  CHECK(a.std_error == b.std_error);
  CHECK(without_wall_time(to_csv({a})) == without_wall_time(to_csv({b})));

  // Worker count must not leak into the numbers: repetition seeds are fixed
  // and results merge by index.
  spec.threads = 1;
  const auto serial = run_experiment(spec);
  CHECK(serial.nrmse == a.nrmse);
  CHECK(serial.std_error == a.std_error);
}

TEST_CASE("csv contract: column order, blanks, six significant digits") {
  ExperimentResult r;
  r.method = "adaptive";
  r.param_name = "delta";
  r.param_value = "0.333";
  r.n = 10000;
  r.bits = 10;
  r.epsilon = std::nullopt;
  r.delta = 1.0 / 3.0;
  r.gamma = 0.5;
  r.alpha = 1.0;
  r.nrmse = 0.0123456789;
  r.std_error = 0.000123456789;
  r.repetitions = 100;
  r.wall_time_ms = 12.5;
  const std::string csv = to_csv({r});
  std::stringstream ss(csv);
  std::string header;
  std::string row;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header ==
        "method,param_name,param_value,n,bits,epsilon,delta,gamma,alpha,"
        "nrmse,stderr,reps,wall_time_ms");
  CHECK(row ==
        "adaptive,delta,0.333,10000,10,,0.333333,0.5,1,0.0123457,0.000123457,"
        "100,12.5");
}

TEST_CASE("sweep produces one comparable row per value") {
  ExperimentSpec spec;
  spec.method = Method::Adaptive;
  spec.repetitions = 10;
  spec.population.n = 1000;
  const auto rows =
      sweep(spec, "delta", {"0.05", "0.333", "0.667", "0.95"});
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.param_name == "delta");
    CHECK(row.repetitions == 10);
  }
  CHECK(rows[1].param_value == "0.333");

  CHECK_THROWS_AS(sweep(spec, "unknown", {"1"}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(spec, "delta", {}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(spec, "delta", {"abc"}), std::invalid_argument);
}

TEST_CASE("method sweep runs the named baselines") {
  ExperimentSpec spec;
  spec.repetitions = 8;
  spec.population.n = 500;
  spec.config.epsilon = 1.0;
  const auto rows = sweep(spec, "method",
                          {"basic", "weighted", "adaptive", "laplace",
                           "rounding", "dithering", "piecewise", "oracle"});
  REQUIRE(rows.size() == 8);
  CHECK(rows.back().nrmse == doctest::Approx(0.0));  // oracle
  for (const auto& row : rows) CHECK(row.nrmse < 1.0);
}

TEST_CASE("invalid method and task combinations are rejected up front") {
  ExperimentSpec spec;
  spec.method = Method::Laplace;  // epsilon missing
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec.method = Method::Piecewise;
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec.method = Method::Laplace;
  spec.task = Task::Variance;
  spec.config.epsilon = 1.0;
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec = ExperimentSpec{};
  spec.repetitions = 1;
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}

TEST_CASE("variance task benchmarks the two-phase estimator") {
  ExperimentSpec spec;
  spec.task = Task::Variance;
  spec.method = Method::Adaptive;
  spec.population.n = 20000;
  spec.population.sigma = 100.0;
  spec.repetitions = 8;
  spec.master_seed = 5;
  const auto result = run_experiment(spec);
  CHECK(result.nrmse < 0.5);
  CHECK(result.target > 0.0);
}

TEST_CASE("geometric-mean task runs on positive data") {
  ExperimentSpec spec;
  spec.task = Task::GeometricMean;
  spec.method = Method::Adaptive;
  spec.population.dist = Distribution::Uniform;
  spec.population.low = 1.0;
  spec.population.high = 500.0;
  spec.population.n = 4000;
  spec.repetitions = 10;
  const auto result = run_experiment(spec);
  CHECK(result.nrmse < 0.2);
}

TEST_CASE("metering one run charges every client") {
  ExperimentSpec spec;
  spec.method = Method::Adaptive;
  spec.population.n = 2000;
  spec.repetitions = 2;
  const PrivacyMeter plain = meter_one_run(spec);
  CHECK(plain.total() == doctest::Approx(2000.0));
  CHECK(plain.per_client_average() == doctest::Approx(1.0));

  spec.config.epsilon = std::log(3.0);  // each bit costs 2p-1 = 0.5
  const PrivacyMeter metered = meter_one_run(spec);
  CHECK(metered.per_client_average() == doctest::Approx(0.5));

  spec.method = Method::Laplace;
  CHECK_THROWS_AS(meter_one_run(spec), std::invalid_argument);
}
