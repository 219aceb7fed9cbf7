#include "copcal/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "copcal/detail/parallel.hpp"
#include "copcal/errors.hpp"
#include "copcal/special_functions.hpp"

namespace copcal {

namespace {

constexpr double kDesignRange = 3.0;  // X ~ U(2,5)

double ks_distance_uniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double hi = (i + 1) / n - values[i];
    const double lo = values[i] - i / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_p_value(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_complementary_cdf((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

std::string model_name(Model m) {
  switch (m) {
    case Model::m0: return "m0";
    case Model::m1: return "m1";
    default: return "m2";
  }
}

double calibration_truth(Model m, double x) {
  switch (m) {
    case Model::m0: return 8.0;
    case Model::m1: return 25.0 - 4.2 * x;
    default: return 12.0 + 8.0 * std::sin(0.4 * x * x);
  }
}

Dataset generate_dataset(Model model, int n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("simulated datasets need n >= 10");
  const CopulaSpec spec = CopulaSpec::frank();
  RngStream rng(seed);
  Dataset data;
  data.x.resize(n);
  data.u1.resize(n);
  data.u2.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(2.0, 5.0);
    const UniformPair pair = sample_pair(spec, calibration_truth(model, x), rng);
    data.x[i] = x;
    data.u1[i] = pair.u1;
    data.u2[i] = pair.u2;
  }
  return data;
}

std::vector<double> paper_bandwidth_grid() {
  std::vector<double> grid(12);
  const double lo = 0.33;
  const double hi = 2.96;
  for (int i = 0; i < 12; ++i) grid[i] = lo * std::pow(hi / lo, i / 11.0);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  if (spec.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (spec.null_degrees.empty()) throw std::invalid_argument("no null degrees given");
  for (double a : spec.alpha_levels)
    if (!(a > 0) || !(a < 1)) throw std::invalid_argument("alpha levels must lie in (0,1)");

  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> grid =
      spec.bandwidth_grid.empty() ? paper_bandwidth_grid() : spec.bandwidth_grid;
  const CopulaSpec copula = CopulaSpec::frank();
  const std::size_t degrees = spec.null_degrees.size();

  ScenarioResult result;
  result.records.resize(static_cast<std::size_t>(spec.replicates) * degrees);

  detail::parallel_for(spec.replicates, spec.threads, [&](int rep) {
    const Dataset data =
        generate_dataset(spec.model, spec.n, derive_stream_seed(spec.seed, rep));
    for (std::size_t di = 0; di < degrees; ++di) {
      ReplicateRecord& rec = result.records[rep * degrees + di];
      rec.replicate = rep;
      rec.null_degree = spec.null_degrees[di];
      try {
        GlrtOptions options;
        options.bandwidth_grid = grid;
        options.threads = 1;
        const GlrtResult test = run_test(data, copula, spec.null_degrees[di],
                                         spec.kernel, options);
        rec.lambda = test.lambda;
        rec.h = test.h;
        rec.dof = test.dof;
        rec.p_value = test.p_value;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  result.rejection_rates.assign(degrees, std::vector<double>(spec.alpha_levels.size(), 0.0));
  for (std::size_t di = 0; di < degrees; ++di) {
    int ok = 0;
    std::vector<int> rejections(spec.alpha_levels.size(), 0);
    for (int rep = 0; rep < spec.replicates; ++rep) {
      const ReplicateRecord& rec = result.records[rep * degrees + di];
      if (rec.failed) {
        ++result.failure_count;
        continue;
      }
      ++ok;
      for (std::size_t ai = 0; ai < spec.alpha_levels.size(); ++ai)
        if (rec.p_value < spec.alpha_levels[ai]) ++rejections[ai];
    }
    for (std::size_t ai = 0; ai < spec.alpha_levels.size(); ++ai)
      result.rejection_rates[di][ai] = ok > 0 ? static_cast<double>(rejections[ai]) / ok : 0.0;
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

WilksSummary wilks_check(int n, int replicates, const KernelSpec& kernel,
                         std::optional<double> fixed_h, std::uint64_t seed, int threads) {
  if (replicates < 2) throw std::invalid_argument("wilks_check needs several replicates");
  const CopulaSpec copula = CopulaSpec::frank();
  const KernelConstants constants = constants_for(kernel, 0);
  const std::vector<double> grid = paper_bandwidth_grid();

  WilksSummary summary;
  summary.replicates = replicates;
  summary.fixed_h = fixed_h;
  if (fixed_h) {
    summary.dof_reference = null_dof(constants, kDesignRange, *fixed_h);
    summary.mu_n_reference = constants.c_k * kDesignRange / *fixed_h;
  }

  std::vector<double> lambdas(replicates);
  std::vector<double> pit(replicates);
  summary.scaled_statistics.resize(replicates);

  detail::parallel_for(replicates, threads, [&](int rep) {
    const Dataset data =
        generate_dataset(Model::m0, n, derive_stream_seed(seed, rep));
    GlrtOptions options;
    if (fixed_h)
      options.h = *fixed_h;
    else
      options.bandwidth_grid = grid;
    options.threads = 1;
    const GlrtResult test = run_test(data, copula, 0, kernel, options);
    lambdas[rep] = test.lambda;
    summary.scaled_statistics[rep] = test.scaled_statistic;
    pit[rep] = fixed_h ? glrt_p_value(test.lambda, summary.dof_reference, test.r_k)
                       : test.p_value;
  });

  summary.ks_distance = ks_distance_uniform(pit);
  summary.ks_p_value = ks_p_value(summary.ks_distance, pit.size());

  double mean = 0;
  for (double l : lambdas) mean += l;
  mean /= replicates;
  double var = 0;
  for (double l : lambdas) var += (l - mean) * (l - mean);
  var /= (replicates - 1);
  summary.lambda_mean = mean;
  summary.lambda_sd = std::sqrt(var);
  return summary;
}

}  // namespace copcal
