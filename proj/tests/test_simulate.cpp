#include <doctest.h>

#include <cmath>
#include <cstring>

#include "copcal/simulate.hpp"
#include "test_support.hpp"

using namespace copcal;

namespace {
const KernelSpec kEpan{KernelId::epanechnikov, 1.0};

bool records_identical(const std::vector<ReplicateRecord>& a,
                       const std::vector<ReplicateRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].replicate != b[i].replicate || a[i].null_degree != b[i].null_degree ||
        a[i].failed != b[i].failed)
      return false;
    if (std::memcmp(&a[i].lambda, &b[i].lambda, sizeof(double)) != 0) return false;
    if (std::memcmp(&a[i].h, &b[i].h, sizeof(double)) != 0) return false;
    if (std::memcmp(&a[i].dof, &b[i].dof, sizeof(double)) != 0) return false;
    if (std::memcmp(&a[i].p_value, &b[i].p_value, sizeof(double)) != 0) return false;
  }
  return true;
}
}  // namespace

TEST_SUITE_BEGIN("simulate");

TEST_CASE("calibration truths") {
  CHECK(calibration_truth(Model::m0, 3.3) == 8.0);
  CHECK(calibration_truth(Model::m1, 0.0) == 25.0);
  CHECK(calibration_truth(Model::m1, 5.0) == doctest::Approx(4.0));
  for (double x = 2.0; x <= 5.0; x += 0.001) {
    const double theta = calibration_truth(Model::m2, x);
    CHECK(theta >= 4.0);
    CHECK(theta <= 20.0);
  }
}

TEST_CASE("dataset generation is deterministic and in range") {
  const Dataset a = generate_dataset(Model::m2, 200, 99);
  const Dataset b = generate_dataset(Model::m2, 200, 99);
  CHECK(a.x == b.x);
  CHECK(a.u1 == b.u1);
  CHECK(a.u2 == b.u2);
  for (double x : a.x) {
    CHECK(x > 2.0);
    CHECK(x < 5.0);
  }
  CHECK_THROWS_AS(generate_dataset(Model::m0, 5, 1), std::invalid_argument);
}

TEST_CASE("constant model draws have the frank kendall tau") {
  const Dataset data = generate_dataset(Model::m0, 4000, 123);
  std::vector<UniformPair> pairs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) pairs[i] = {data.u1[i], data.u2[i]};
  const double target = oracle::frank_tau(8.0);
  CHECK(std::abs(oracle::kendall_tau(pairs) - target) <= 0.03);
}

TEST_CASE("paper bandwidth grid") {
  const std::vector<double> grid = paper_bandwidth_grid();
  CHECK(grid.size() == 12);
  CHECK(grid.front() == 0.33);
  CHECK(grid.back() == 2.96);
  for (std::size_t i = 2; i < grid.size(); ++i)
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[1] / grid[0]).epsilon(1e-6));
}

TEST_CASE("scenario results are bit-identical across thread counts") {
  ScenarioSpec spec;
  spec.model = Model::m0;
  spec.n = 80;
  spec.replicates = 10;
  spec.null_degrees = {0, 1};
  spec.seed = 4242;
  spec.kernel = kEpan;
  spec.bandwidth_grid = {0.9, 1.8, 2.9};

  spec.threads = 1;
  const ScenarioResult serial = run_scenario(spec);
  spec.threads = 2;
  const ScenarioResult threaded = run_scenario(spec);

  CHECK(records_identical(serial.records, threaded.records));
  CHECK(serial.rejection_rates == threaded.rejection_rates);
  CHECK(serial.failure_count == threaded.failure_count);
}

TEST_CASE("extending the replicate stream preserves the prefix") {
  ScenarioSpec spec;
  spec.model = Model::m0;
  spec.n = 80;
  spec.replicates = 6;
  spec.seed = 31;
  spec.kernel = kEpan;
  spec.bandwidth_grid = {1.2, 2.4};
  spec.threads = 2;
  const ScenarioResult small = run_scenario(spec);
  spec.replicates = 12;
  const ScenarioResult big = run_scenario(spec);
  CHECK(records_identical(small.records,
                          {big.records.begin(), big.records.begin() + 6}));
}

TEST_CASE("rejection rates are monotone in alpha") {
  ScenarioSpec spec;
  spec.model = Model::m1;
  spec.n = 100;
  spec.replicates = 30;
  spec.null_degrees = {0};
  spec.alpha_levels = {0.20, 0.10, 0.05, 0.01};
  spec.seed = 77;
  spec.kernel = kEpan;
  spec.bandwidth_grid = {0.9, 1.8, 2.9};
  spec.threads = 2;
  const ScenarioResult result = run_scenario(spec);
  CHECK(result.failure_count == 0);
  for (std::size_t ai = 1; ai < spec.alpha_levels.size(); ++ai)
    CHECK(result.rejection_rates[0][ai] <= result.rejection_rates[0][ai - 1]);
}

TEST_CASE("wilks summary smoke check") {
  const WilksSummary w = wilks_check(120, 40, kEpan, 1.5, 11, 2);
  CHECK(w.replicates == 40);
  CHECK(w.scaled_statistics.size() == 40);
  CHECK(w.dof_reference == doctest::Approx(constants_for(kEpan, 0).r_k * 0.45 * 2.0));
  CHECK(w.mu_n_reference == doctest::Approx(0.45 * 2.0));
  CHECK(w.ks_p_value >= 0.0);
  CHECK(w.ks_p_value <= 1.0);
  CHECK(std::isfinite(w.lambda_mean));
  CHECK(w.lambda_sd > 0);
}

TEST_SUITE_END();
