#include "bitpush/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "bitpush/baselines.hpp"

namespace bitpush {

namespace {

struct MethodEntry {
  Method method;
  const char* name;
};

constexpr MethodEntry kMethods[] = {
    {Method::Basic, "basic"},         {Method::Weighted, "weighted"},
    {Method::Adaptive, "adaptive"},   {Method::Laplace, "laplace"},
    {Method::Rounding, "rounding"},   {Method::Dithering, "dithering"},
    {Method::Piecewise, "piecewise"}, {Method::Oracle, "oracle"},
};

bool is_bitpush(Method m) {
  return m == Method::Basic || m == Method::Weighted || m == Method::Adaptive;
}

PushMethod push_method_of(Method m) {
  switch (m) {
    case Method::Basic: return PushMethod::Uniform;
    case Method::Weighted: return PushMethod::Geometric;
    default: return PushMethod::Adaptive;
  }
}

double parse_numeric(const std::string& text, const std::string& what) {
  double out = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("sweep: bad " + what + " value '" + text + "'");
  }
  return out;
}

// The baselines assume inputs scaled from the codec range.
ValueRange baseline_range(const FixedPointCodec& codec) {
  return ValueRange(codec.min_value(), codec.max_value());
}

double baseline_mean(Method method, const std::vector<double>& values,
                     const ValueRange& range,
                     const std::optional<double>& epsilon, Rng& rng) {
  std::optional<RandomizedResponse> rr;
  if (epsilon) rr.emplace(*epsilon);
  const RandomizedResponse* rrp = rr ? &*rr : nullptr;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  switch (method) {
    case Method::Laplace:
      for (double x : values) sum += laplace_report(x, range, *epsilon, rng);
      return sum / n;
    case Method::Rounding: {
      for (double x : values) {
        sum += randomized_rounding_report(x, range, rrp, rng);
      }
      double mean_bit = sum / n;
      if (rrp != nullptr) mean_bit = rrp->unbias(mean_bit);
      return range.from_unit(mean_bit);
    }
    case Method::Dithering:
      for (double x : values) {
        sum += dithering_estimate(dithering_report(x, range, rrp, rng), range,
                                  rrp);
      }
      return sum / n;
    case Method::Piecewise:
      for (double x : values) {
        sum += piecewise_to_value(piecewise_report(x, range, *epsilon, rng),
                                  range);
      }
      return sum / n;
    default:
      throw std::invalid_argument("not a baseline method");
  }
}

// Case-2 style variance from two dithering mean estimates, the comparison
// target the adaptive estimator is benchmarked against.
double dithering_variance(const std::vector<double>& values,
                          const FixedPointCodec& codec,
                          const std::optional<double>& epsilon, Rng& rng) {
  std::optional<RandomizedResponse> rr;
  if (epsilon) rr.emplace(*epsilon);
  const RandomizedResponse* rrp = rr ? &*rr : nullptr;
  const ValueRange range = baseline_range(codec);
  const ValueRange square_range(0.0, range.high * range.high);
  const std::size_t half = values.size() / 2;
  double sum_x = 0.0;
  double sum_x2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    sum_x += dithering_estimate(dithering_report(values[i], range, rrp, rng),
                                range, rrp);
  }
  for (std::size_t i = half; i < values.size(); ++i) {
    const double sq = values[i] * values[i];
    sum_x2 += dithering_estimate(
        dithering_report(sq, square_range, rrp, rng), square_range, rrp);
  }
  const double mean_x = sum_x / static_cast<double>(half);
  const double mean_x2 = sum_x2 / static_cast<double>(values.size() - half);
  return std::max(0.0, mean_x2 - mean_x * mean_x);
}

void validate_combination(const ExperimentSpec& spec) {
  spec.config.validate();
  if (spec.repetitions < 2) {
    throw std::invalid_argument("experiment: need at least 2 repetitions");
  }
  const bool needs_epsilon =
      spec.method == Method::Laplace || spec.method == Method::Piecewise;
  if (needs_epsilon && !spec.config.epsilon) {
    throw std::invalid_argument(std::string(method_name(spec.method)) +
                                " requires --epsilon > 0");
  }
  switch (spec.task) {
    case Task::Mean:
      break;
    case Task::Variance:
      if (!is_bitpush(spec.method) && spec.method != Method::Dithering &&
          spec.method != Method::Oracle) {
        throw std::invalid_argument(
            "variance task supports bit-pushing methods, dithering and oracle");
      }
      break;
    case Task::GeometricMean:
      if (!is_bitpush(spec.method) && spec.method != Method::Oracle) {
        throw std::invalid_argument(
            "geometric-mean task supports bit-pushing methods and oracle");
      }
      break;
  }
}

struct TaskContext {
  std::vector<double> values;  // what clients hold
  double target = 0.0;
  std::int64_t clipped = 0;
};

TaskContext make_context(const ExperimentSpec& spec,
                         const FixedPointCodec& codec,
                         std::uint64_t pop_seed) {
  const Population raw = generate(spec.population, pop_seed);
  TaskContext ctx;
  switch (spec.task) {
    case Task::Mean: {
      PreparedPopulation prep = prepare(raw.values, codec);
      ctx.target = prep.mean;
      ctx.clipped = prep.clipped;
      ctx.values = std::move(prep.values);
      break;
    }
    case Task::Variance: {
      PreparedPopulation prep = prepare(raw.values, codec);
      ctx.target = prep.variance;
      ctx.clipped = prep.clipped;
      ctx.values = std::move(prep.values);
      break;
    }
    case Task::GeometricMean: {
      // The grid lives on the logarithms here.
      const FixedPointCodec logs = log_codec();
      double log_sum = 0.0;
      ctx.values.reserve(raw.values.size());
      for (double x : raw.values) {
        if (!(x > 0.0)) {
          throw std::domain_error(
              "geometric-mean task needs positive values");
        }
        const double log_x = std::log(x);
        if (logs.clamp(log_x) != log_x) ++ctx.clipped;
        const double snapped_log = logs.snap(logs.clamp(log_x));
        ctx.values.push_back(std::exp(snapped_log));
        log_sum += snapped_log;
      }
      ctx.target =
          std::exp(log_sum / static_cast<double>(ctx.values.size()));
      break;
    }
  }
  return ctx;
}

double one_repetition(const ExperimentSpec& spec, const TaskContext& ctx,
                      const FixedPointCodec& codec, Rng& rng) {
  ProtocolConfig config = spec.config;
  config.clients = static_cast<std::int64_t>(ctx.values.size());
  switch (spec.task) {
    case Task::Mean:
      if (spec.method == Method::Oracle) return ctx.target;
      if (is_bitpush(spec.method)) {
        return push_mean(ctx.values, codec, config,
                         push_method_of(spec.method), rng)
            .estimate;
      }
      return baseline_mean(spec.method, ctx.values, baseline_range(codec),
                           config.epsilon, rng);
    case Task::Variance:
      if (spec.method == Method::Oracle) return ctx.target;
      if (spec.method == Method::Dithering) {
        return dithering_variance(ctx.values, codec, config.epsilon, rng);
      }
      return estimate_variance(ctx.values, config, spec.variance_method, rng,
                               push_method_of(spec.method));
    case Task::GeometricMean:
      if (spec.method == Method::Oracle) return ctx.target;
      return estimate_geometric_mean(ctx.values, config, rng,
                                     push_method_of(spec.method));
  }
  throw std::invalid_argument("experiment: unknown task");
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

}  // namespace

const char* method_name(Method method) {
  for (const auto& entry : kMethods) {
    if (entry.method == method) return entry.name;
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (const auto& entry : kMethods) {
    if (name == entry.name) return entry.method;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

const char* task_name(Task task) {
  switch (task) {
    case Task::Mean: return "mean";
    case Task::Variance: return "variance";
    case Task::GeometricMean: return "geomean";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  if (name == "mean") return Task::Mean;
  if (name == "variance") return Task::Variance;
  if (name == "geomean") return Task::GeometricMean;
  throw std::invalid_argument("unknown task '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate_combination(spec);
  const auto start = std::chrono::steady_clock::now();

  const FixedPointCodec codec =
      FixedPointCodec::make_unsigned(spec.config.bits, 0);
  const std::uint64_t pop_seed =
      spec.population.seed.value_or(mix64(spec.master_seed));
  const TaskContext ctx = make_context(spec, codec, pop_seed);

  const int reps = spec.repetitions;
  std::vector<double> estimates(static_cast<std::size_t>(reps), 0.0);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      try {
        Rng rng = derived_rng(spec.master_seed, static_cast<std::uint64_t>(r) + 1);
        estimates[static_cast<std::size_t>(r)] =
            one_repetition(spec, ctx, codec, rng);
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  int workers = spec.threads > 0
                    ? spec.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, reps);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  double mse = 0.0;
  for (double est : estimates) {
    mse += (est - ctx.target) * (est - ctx.target);
  }
  mse /= static_cast<double>(reps);
  const double rmse = std::sqrt(mse);
  double sq_sd = 0.0;
  for (double est : estimates) {
    const double sq = (est - ctx.target) * (est - ctx.target);
    sq_sd += (sq - mse) * (sq - mse);
  }
  sq_sd = std::sqrt(sq_sd / static_cast<double>(reps - 1));
  // Delta method: se(sqrt(mean of squares)) = sd(squares) / (2 rmse sqrt(R)).
  const double rmse_se =
      rmse > 0.0 ? sq_sd / (2.0 * rmse * std::sqrt(static_cast<double>(reps)))
                 : 0.0;

  ExperimentResult result;
  result.method = method_name(spec.method);
  result.n = static_cast<std::int64_t>(ctx.values.size());
  result.bits = spec.config.bits;
  result.epsilon = spec.config.epsilon;
  if (spec.method == Method::Adaptive) {
    result.delta = spec.config.delta;
    result.gamma = spec.config.gamma;
    result.alpha = spec.config.round2_alpha();
  } else if (spec.method == Method::Weighted) {
    result.alpha = spec.config.weighted_alpha();
  }
  result.normalized = std::abs(ctx.target) > 1e-12;
  const double scale = result.normalized ? std::abs(ctx.target) : 1.0;
  result.nrmse = rmse / scale;
  result.std_error = rmse_se / scale;
  result.repetitions = reps;
  result.clipped = ctx.clipped;
  result.target = ctx.target;
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  return result;
}

std::vector<ExperimentResult> sweep(const ExperimentSpec& base,
                                    const std::string& parameter,
                                    const std::vector<std::string>& values) {
  if (values.empty()) {
    throw std::invalid_argument("sweep: no values given");
  }
  std::vector<ExperimentResult> results;
  results.reserve(values.size());
  for (const auto& value : values) {
    ExperimentSpec spec = base;
    if (parameter == "gamma") {
      spec.config.gamma = parse_numeric(value, parameter);
    } else if (parameter == "delta") {
      spec.config.delta = parse_numeric(value, parameter);
    } else if (parameter == "alpha") {
      spec.config.alpha = parse_numeric(value, parameter);
    } else if (parameter == "mu") {
      if (spec.population.dist != Distribution::Normal) {
        throw std::invalid_argument("sweep: mu applies to normal populations");
      }
      spec.population.mu = parse_numeric(value, parameter);
    } else if (parameter == "bits") {
      spec.config.bits = static_cast<int>(parse_numeric(value, parameter));
    } else if (parameter == "n") {
      spec.population.n = static_cast<std::int64_t>(parse_numeric(value, parameter));
      spec.config.clients = spec.population.n;
    } else if (parameter == "epsilon") {
      spec.config.epsilon = parse_numeric(value, parameter);
    } else if (parameter == "squash_k") {
      spec.config.squash_k = parse_numeric(value, parameter);
    } else if (parameter == "method") {
      spec.method = parse_method(value);
    } else {
      throw std::invalid_argument("sweep: unknown parameter '" + parameter + "'");
    }
    ExperimentResult result = run_experiment(spec);
    result.param_name = parameter;
    result.param_value = value;
    results.push_back(std::move(result));
  }
  return results;
}

std::string to_csv(const std::vector<ExperimentResult>& results, bool header) {
  std::string out;
  if (header) {
    out +=
        "method,param_name,param_value,n,bits,epsilon,delta,gamma,alpha,"
        "nrmse,stderr,reps,wall_time_ms\n";
  }
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const auto& r : results) {
    out += r.method;
    out += ',' + r.param_name;
    out += ',' + r.param_value;
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.bits);
    out += ',' + opt(r.epsilon);
    out += ',' + opt(r.delta);
    out += ',' + opt(r.gamma);
    out += ',' + opt(r.alpha);
    out += ',' + format_double(r.nrmse);
    out += ',' + format_double(r.std_error);
    out += ',' + std::to_string(r.repetitions);
    out += ',' + format_double(r.wall_time_ms);
    out += '\n';
  }
  return out;
}

PrivacyMeter meter_one_run(const ExperimentSpec& spec) {
  validate_combination(spec);
  if (!is_bitpush(spec.method)) {
    throw std::invalid_argument(
        "metering applies to bit-level methods (basic, weighted, adaptive)");
  }
  const FixedPointCodec codec =
      FixedPointCodec::make_unsigned(spec.config.bits, 0);
  const std::uint64_t pop_seed =
      spec.population.seed.value_or(mix64(spec.master_seed));
  const TaskContext ctx = make_context(spec, codec, pop_seed);
  ProtocolConfig config = spec.config;
  config.clients = static_cast<std::int64_t>(ctx.values.size());
  PrivacyMeter meter(config.clients);
  Rng rng = derived_rng(spec.master_seed, 1);
  push_mean(ctx.values, codec, config, push_method_of(spec.method), rng,
            &meter);
  return meter;
}

}  // namespace bitpush
