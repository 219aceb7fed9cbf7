#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copcal/errors.hpp"
#include "copcal/glrt.hpp"
#include "copcal/io.hpp"
#include "copcal/simulate.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace copcal;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitNumericalError = 3;
constexpr int kExitConfigError = 4;

struct Options {
  std::string input;
  std::string out;
  std::string family = "frank";
  std::string kernel = "epanechnikov";
  int null_degree = 0;
  std::vector<int> null_degrees = {0};
  std::optional<double> bandwidth;
  std::vector<double> grid;
  std::vector<double> alpha = {0.10, 0.05, 0.01};
  std::string model = "m0";
  int n = 200;
  int reps = 200;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  int grid_points = 50;
};

CopulaSpec parse_family(const std::string& name) {
  return name == "clayton" ? CopulaSpec::clayton() : CopulaSpec::frank();
}

KernelSpec parse_kernel(const std::string& name) {
  return {name == "uniform" ? KernelId::uniform : KernelId::epanechnikov, 1.0};
}

Model parse_model(const std::string& name) {
  if (name == "m0") return Model::m0;
  if (name == "m1") return Model::m1;
  return Model::m2;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << content;
}

json config_echo(const Options& opt, const CopulaSpec& spec) {
  json c;
  c["input"] = opt.input;
  c["family"] = family_name(spec.family);
  c["link"] = link_name(spec.link);
  c["kernel"] = opt.kernel;
  c["null_degree"] = opt.null_degree;
  if (opt.bandwidth)
    c["bandwidth"] = *opt.bandwidth;
  else
    c["bandwidth"] = nullptr;
  c["grid"] = opt.grid;
  c["threads"] = opt.threads;
  return c;
}

json result_to_json(const GlrtResult& r) {
  json j;
  j["lambda"] = r.lambda;
  j["h"] = r.h;
  j["null_degree"] = r.null_degree;
  j["loglik_null"] = r.loglik_null;
  j["loglik_alt"] = r.loglik_alt;
  j["r_k"] = r.r_k;
  j["c_k"] = r.c_k;
  j["covariate_range"] = r.covariate_range;
  j["dof"] = r.dof;
  j["scaled_statistic"] = r.scaled_statistic;
  j["p_value"] = r.p_value;
  j["negative_lambda"] = r.negative_lambda;
  j["low_dof_warning"] = r.low_dof_warning;
  j["null_converged"] = r.null_converged;
  j["alt_converged"] = r.alt_converged;
  j["null_model"] = {{"degree", r.null_model.degree},
                     {"coefficients", r.null_model.coefficients},
                     {"family", family_name(r.null_model.spec.family)},
                     {"link", link_name(r.null_model.spec.link)}};
  if (r.bandwidth_selection) {
    json sel;
    sel["grid"] = r.bandwidth_selection->grid;
    json scores = json::array();
    for (double s : r.bandwidth_selection->cv_scores)
      scores.push_back(std::isfinite(s) ? json(s) : json(nullptr));
    sel["cv_scores"] = scores;
    sel["loo_failures"] = r.bandwidth_selection->loo_failures;
    sel["chosen"] = r.bandwidth_selection->chosen;
    j["bandwidth_selection"] = sel;
  } else {
    j["bandwidth_selection"] = nullptr;
  }
  return j;
}

int cmd_test(const Options& opt) {
  const Dataset data = read_dataset_csv(opt.input);
  const CopulaSpec spec = parse_family(opt.family);
  GlrtOptions options;
  options.h = opt.bandwidth;
  options.bandwidth_grid = opt.grid;
  options.threads = opt.threads;
  const GlrtResult result =
      run_test(data, spec, opt.null_degree, parse_kernel(opt.kernel), options);

  json report;
  report["version"] = kVersion;
  report["command"] = "test";
  report["config"] = config_echo(opt, spec);
  report["n"] = data.size();
  report["result"] = result_to_json(result);
  const std::string text = report.dump(2) + "\n";
  if (opt.out.empty())
    std::cout << text;
  else
    write_file(opt.out, text);
  return kExitOk;
}

int cmd_fit(const Options& opt) {
  const Dataset data = read_dataset_csv(opt.input);
  const CopulaSpec spec = parse_family(opt.family);
  const KernelSpec kernel = parse_kernel(opt.kernel);
  validate_dataset(data);

  double h;
  if (opt.bandwidth) {
    h = *opt.bandwidth;
  } else {
    const std::vector<double> grid =
        opt.grid.empty() ? default_bandwidth_grid(covariate_range(data)) : opt.grid;
    h = loo_cv_bandwidth(data, spec, kernel, grid, opt.null_degree, opt.threads).chosen;
  }

  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  std::vector<double> grid_x;
  if (opt.grid_points <= 1) {
    grid_x.push_back(0.5 * (*lo + *hi));
  } else {
    for (int i = 0; i < opt.grid_points; ++i)
      grid_x.push_back(*lo + (*hi - *lo) * i / (opt.grid_points - 1));
  }

  const std::vector<LocalFit> curve =
      estimate_curve(data, spec, kernel, grid_x, h, opt.null_degree);
  std::ostringstream out;
  out << "x,eta_hat,theta_hat,converged\n";
  for (const LocalFit& fit : curve)
    out << format_double(fit.x0) << ',' << format_double(fit.eta_hat) << ','
        << format_double(link_inverse(spec.link, fit.eta_hat)) << ','
        << (fit.converged ? 1 : 0) << '\n';
  if (opt.out.empty())
    std::cout << out.str();
  else
    write_file(opt.out, out.str());
  return kExitOk;
}

int cmd_bandwidth(const Options& opt) {
  const Dataset data = read_dataset_csv(opt.input);
  const CopulaSpec spec = parse_family(opt.family);
  const KernelSpec kernel = parse_kernel(opt.kernel);
  validate_dataset(data);
  const std::vector<double> grid =
      opt.grid.empty() ? default_bandwidth_grid(covariate_range(data)) : opt.grid;
  const BandwidthSelection sel =
      loo_cv_bandwidth(data, spec, kernel, grid, opt.null_degree, opt.threads);

  std::ostringstream out;
  out << "h,cv_score,chosen\n";
  for (std::size_t i = 0; i < sel.grid.size(); ++i)
    out << format_double(sel.grid[i]) << ',' << format_double(sel.cv_scores[i]) << ','
        << (i == sel.chosen_index ? 1 : 0) << '\n';
  if (opt.out.empty())
    std::cout << out.str();
  else
    write_file(opt.out, out.str());
  return kExitOk;
}

int cmd_simulate(const Options& opt) {
  ScenarioSpec spec;
  spec.model = parse_model(opt.model);
  spec.n = opt.n;
  spec.replicates = opt.reps;
  spec.alpha_levels = opt.alpha;
  spec.null_degrees = opt.null_degrees;
  spec.seed = *opt.seed;
  spec.kernel = parse_kernel(opt.kernel);
  spec.bandwidth_grid = opt.grid;
  spec.threads = opt.threads;
  const ScenarioResult result = run_scenario(spec);

  std::ostringstream table;
  table << "model,n,null_degree,alpha,rate\n";
  for (std::size_t di = 0; di < spec.null_degrees.size(); ++di)
    for (std::size_t ai = 0; ai < spec.alpha_levels.size(); ++ai)
      table << opt.model << ',' << spec.n << ',' << spec.null_degrees[di] << ','
            << format_double(spec.alpha_levels[ai]) << ','
            << format_double(result.rejection_rates[di][ai]) << '\n';

  json sidecar;
  sidecar["version"] = kVersion;
  sidecar["command"] = "simulate";
  sidecar["config"] = {{"model", opt.model},
                       {"n", spec.n},
                       {"replicates", spec.replicates},
                       {"null_degrees", spec.null_degrees},
                       {"alpha_levels", spec.alpha_levels},
                       {"seed", spec.seed},
                       {"kernel", opt.kernel},
                       {"grid", spec.bandwidth_grid}};
  sidecar["failure_count"] = result.failure_count;
  json records = json::array();
  for (const ReplicateRecord& rec : result.records) {
    json r;
    r["replicate"] = rec.replicate;
    r["null_degree"] = rec.null_degree;
    if (rec.failed) {
      r["failed"] = true;
      r["error"] = rec.error;
    } else {
      r["lambda"] = rec.lambda;
      r["h"] = rec.h;
      r["dof"] = rec.dof;
      r["p_value"] = rec.p_value;
    }
    records.push_back(r);
  }
  sidecar["records"] = records;

  if (opt.out.empty()) {
    std::cout << table.str();
  } else {
    write_file(opt.out, table.str());
    write_file(opt.out + ".json", sidecar.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional copula calibration estimation and testing"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool with_input) {
    if (with_input)
      cmd->add_option("input", opt.input, "input CSV (header x,u1,u2 or x,y1,y2)")
          ->required();
    cmd->add_option("--family", opt.family, "copula family")
        ->check(CLI::IsMember({"frank", "clayton"}));
    cmd->add_option("--kernel", opt.kernel, "smoothing kernel")
        ->check(CLI::IsMember({"epanechnikov", "uniform"}));
    cmd->add_option("--grid", opt.grid, "bandwidth grid, comma separated")->delimiter(',');
    cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", opt.out, "output path (stdout when omitted)");
    cmd->add_option("--seed", opt.seed, "random seed");
  };

  CLI::App* test = app.add_subcommand("test", "GLRT of a polynomial calibration null");
  add_common(test, true);
  test->add_option("--null-degree", opt.null_degree, "polynomial degree of the null")
      ->check(CLI::Range(0, 3));
  test->add_option("--bandwidth", opt.bandwidth, "fixed bandwidth (skips LOO-CV)")
      ->check(CLI::PositiveNumber);

  CLI::App* fit = app.add_subcommand("fit", "estimate the calibration curve");
  add_common(fit, true);
  fit->add_option("--null-degree", opt.null_degree, "local polynomial degree")
      ->check(CLI::Range(0, 3));
  fit->add_option("--bandwidth", opt.bandwidth, "fixed bandwidth (skips LOO-CV)")
      ->check(CLI::PositiveNumber);
  fit->add_option("--grid-points", opt.grid_points, "number of curve output points")
      ->check(CLI::PositiveNumber);

  CLI::App* bandwidth = app.add_subcommand("bandwidth", "LOO-CV bandwidth scores");
  add_common(bandwidth, true);
  bandwidth->add_option("--null-degree", opt.null_degree, "local polynomial degree")
      ->check(CLI::Range(0, 3));

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo size/power study");
  add_common(simulate, false);
  simulate->add_option("--model", opt.model, "generating model")
      ->check(CLI::IsMember({"m0", "m1", "m2"}));
  simulate->add_option("--n", opt.n, "sample size per replicate")
      ->check(CLI::Range(10, 1000000));
  simulate->add_option("--reps", opt.reps, "number of replicates")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--null-degree", opt.null_degrees, "null degrees, comma separated")
      ->delimiter(',');
  simulate->add_option("--alpha", opt.alpha, "test levels, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  for (int degree : opt.null_degrees)
    if (degree < 0 || degree > 3) {
      std::cerr << "error: --null-degree values must lie in 0..3\n";
      return kExitConfigError;
    }
  for (double alpha : opt.alpha)
    if (!(alpha > 0) || !(alpha < 1)) {
      std::cerr << "error: --alpha levels must lie strictly inside (0,1)\n";
      return kExitConfigError;
    }

  try {
    if (app.got_subcommand(test)) return cmd_test(opt);
    if (app.got_subcommand(fit)) return cmd_fit(opt);
    if (app.got_subcommand(bandwidth)) return cmd_bandwidth(opt);
    if (!opt.seed) {
      std::cerr << "error: simulate requires --seed for reproducibility\n";
      return kExitConfigError;
    }
    return cmd_simulate(opt);
  } catch (const CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
}
