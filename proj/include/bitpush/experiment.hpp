#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bitpush/estimators.hpp"
#include "bitpush/population.hpp"
#include "bitpush/protocol.hpp"

namespace bitpush {

enum class Method {
  Basic,      // single round, uniform bit weights
  Weighted,   // single round, p_j ~ 2^(alpha j)
  Adaptive,   // two rounds
  Laplace,
  Rounding,
  Dithering,
  Piecewise,
  Oracle,  // reports the true target; sanity floor for every benchmark
};

enum class Task { Mean, Variance, GeometricMean };

const char* method_name(Method method);
Method parse_method(const std::string& name);
const char* task_name(Task task);
Task parse_task(const std::string& name);

struct ExperimentSpec {
  Method method = Method::Adaptive;
  Task task = Task::Mean;
  VarianceMethod variance_method = VarianceMethod::CenteredSquare;
  PopulationSpec population;
  ProtocolConfig config;
  int repetitions = 100;
  std::uint64_t master_seed = 42;
  int threads = 0;  // 0 = hardware concurrency
};

struct ExperimentResult {
  std::string method;
  std::string param_name;
  std::string param_value;
  std::int64_t n = 0;
  int bits = 0;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<double> alpha;
  double nrmse = 0.0;
  double std_error = 0.0;
  bool normalized = true;  // false when the target was 0 and plain RMSE is reported
  int repetitions = 0;
  double wall_time_ms = 0.0;
  std::int64_t clipped = 0;  // diagnostic, not serialized
  double target = 0.0;       // diagnostic, not serialized
};

// Fixed population, `repetitions` independently seeded protocol runs, NRMSE
// against the population's own (grid-snapped) target.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// One result per value, all runs sharing the base master seed so curves are
// comparable point-for-point.  Parameter is one of: gamma, delta, alpha, mu,
// bits, n, epsilon, squash_k, method.
std::vector<ExperimentResult> sweep(const ExperimentSpec& base,
                                    const std::string& parameter,
                                    const std::vector<std::string>& values);

// Exact output contract: columns method, param_name, param_value, n, bits,
// epsilon, delta, gamma, alpha, nrmse, stderr, reps, wall_time_ms; blanks for
// inapplicable fields; floats with six significant digits.
std::string to_csv(const std::vector<ExperimentResult>& results,
                   bool header = true);

// Runs one repetition with a privacy meter attached and returns it (bit-level
// methods only).
PrivacyMeter meter_one_run(const ExperimentSpec& spec);

}  // namespace bitpush
