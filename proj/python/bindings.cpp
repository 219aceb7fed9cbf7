#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "copcal/copula.hpp"
#include "copcal/fit.hpp"
#include "copcal/glrt.hpp"
#include "copcal/io.hpp"
#include "copcal/kernel.hpp"
#include "copcal/simulate.hpp"
#include "copcal/special_functions.hpp"

namespace py = pybind11;
using namespace copcal;

namespace {

CopulaSpec spec_from_name(const std::string& family) {
  if (family == "frank") return CopulaSpec::frank();
  if (family == "clayton") return CopulaSpec::clayton();
  throw std::invalid_argument("unknown family '" + family + "'");
}

KernelSpec kernel_from_name(const std::string& kernel) {
  if (kernel == "epanechnikov") return {KernelId::epanechnikov, 1.0};
  if (kernel == "uniform") return {KernelId::uniform, 1.0};
  throw std::invalid_argument("unknown kernel '" + kernel + "'");
}

Model model_from_name(const std::string& model) {
  if (model == "m0") return Model::m0;
  if (model == "m1") return Model::m1;
  if (model == "m2") return Model::m2;
  throw std::invalid_argument("unknown model '" + model + "'");
}

Dataset dataset_from_columns(std::vector<double> x, std::vector<double> u1,
                             std::vector<double> u2) {
  Dataset d{std::move(x), std::move(u1), std::move(u2)};
  validate_dataset(d);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conditional copula calibration estimation and GLR testing";
  m.attr("__version__") = kVersion;

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_columns), py::arg("x"), py::arg("u1"), py::arg("u2"))
      .def_readonly("x", &Dataset::x)
      .def_readonly("u1", &Dataset::u1)
      .def_readonly("u2", &Dataset::u2)
      .def("__len__", &Dataset::size);

  py::class_<CalibrationModel>(m, "CalibrationModel")
      .def_readonly("degree", &CalibrationModel::degree)
      .def_readonly("coefficients", &CalibrationModel::coefficients)
      .def("eta", &CalibrationModel::eta)
      .def_property_readonly("family", [](const CalibrationModel& m_) {
        return family_name(m_.spec.family);
      });

  py::class_<LocalFit>(m, "LocalFit")
      .def_readonly("x0", &LocalFit::x0)
      .def_readonly("h", &LocalFit::h)
      .def_readonly("degree", &LocalFit::degree)
      .def_readonly("beta", &LocalFit::beta)
      .def_readonly("eta_hat", &LocalFit::eta_hat)
      .def_readonly("converged", &LocalFit::converged)
      .def_readonly("n_effective", &LocalFit::n_effective);

  py::class_<BandwidthSelection>(m, "BandwidthSelection")
      .def_readonly("grid", &BandwidthSelection::grid)
      .def_readonly("cv_scores", &BandwidthSelection::cv_scores)
      .def_readonly("loo_failures", &BandwidthSelection::loo_failures)
      .def_readonly("chosen", &BandwidthSelection::chosen)
      .def_readonly("chosen_index", &BandwidthSelection::chosen_index);

  py::class_<KernelConstants>(m, "KernelConstants")
      .def_readonly("c_k", &KernelConstants::c_k)
      .def_readonly("nu_k", &KernelConstants::nu_k)
      .def_readonly("r_k", &KernelConstants::r_k);

  py::class_<GlrtResult>(m, "GlrtResult")
      .def_readonly("lambda_", &GlrtResult::lambda)
      .def_readonly("h", &GlrtResult::h)
      .def_readonly("null_degree", &GlrtResult::null_degree)
      .def_readonly("loglik_null", &GlrtResult::loglik_null)
      .def_readonly("loglik_alt", &GlrtResult::loglik_alt)
      .def_readonly("r_k", &GlrtResult::r_k)
      .def_readonly("c_k", &GlrtResult::c_k)
      .def_readonly("covariate_range", &GlrtResult::covariate_range)
      .def_readonly("dof", &GlrtResult::dof)
      .def_readonly("scaled_statistic", &GlrtResult::scaled_statistic)
      .def_readonly("p_value", &GlrtResult::p_value)
      .def_readonly("negative_lambda", &GlrtResult::negative_lambda)
      .def_readonly("low_dof_warning", &GlrtResult::low_dof_warning)
      .def_readonly("null_converged", &GlrtResult::null_converged)
      .def_readonly("alt_converged", &GlrtResult::alt_converged)
      .def_readonly("null_model", &GlrtResult::null_model)
      .def_readonly("bandwidth_selection", &GlrtResult::bandwidth_selection);

  py::class_<ReplicateRecord>(m, "ReplicateRecord")
      .def_readonly("replicate", &ReplicateRecord::replicate)
      .def_readonly("null_degree", &ReplicateRecord::null_degree)
      .def_readonly("lambda_", &ReplicateRecord::lambda)
      .def_readonly("h", &ReplicateRecord::h)
      .def_readonly("dof", &ReplicateRecord::dof)
      .def_readonly("p_value", &ReplicateRecord::p_value)
      .def_readonly("failed", &ReplicateRecord::failed);

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("rejection_rates", &ScenarioResult::rejection_rates)
      .def_readonly("records", &ScenarioResult::records)
      .def_readonly("failure_count", &ScenarioResult::failure_count)
      .def_readonly("elapsed_seconds", &ScenarioResult::elapsed_seconds);

  py::class_<WilksSummary>(m, "WilksSummary")
      .def_readonly("replicates", &WilksSummary::replicates)
      .def_readonly("dof_reference", &WilksSummary::dof_reference)
      .def_readonly("mu_n_reference", &WilksSummary::mu_n_reference)
      .def_readonly("ks_distance", &WilksSummary::ks_distance)
      .def_readonly("ks_p_value", &WilksSummary::ks_p_value)
      .def_readonly("lambda_mean", &WilksSummary::lambda_mean)
      .def_readonly("lambda_sd", &WilksSummary::lambda_sd)
      .def_readonly("scaled_statistics", &WilksSummary::scaled_statistics);

  m.def(
      "copula_cdf",
      [](const std::string& family, double u1, double u2, double theta) {
        return copula_cdf(spec_from_name(family), {u1, u2}, theta);
      },
      py::arg("family"), py::arg("u1"), py::arg("u2"), py::arg("theta"));
  m.def(
      "log_density",
      [](const std::string& family, double u1, double u2, double theta) {
        return log_density(spec_from_name(family), {u1, u2}, theta);
      },
      py::arg("family"), py::arg("u1"), py::arg("u2"), py::arg("theta"));
  m.def(
      "ell",
      [](const std::string& family, double t, double u1, double u2) {
        return ell(spec_from_name(family), t, {u1, u2});
      },
      py::arg("family"), py::arg("t"), py::arg("u1"), py::arg("u2"));
  m.def(
      "ell1",
      [](const std::string& family, double t, double u1, double u2) {
        return ell1(spec_from_name(family), t, {u1, u2});
      },
      py::arg("family"), py::arg("t"), py::arg("u1"), py::arg("u2"));
  m.def(
      "ell2",
      [](const std::string& family, double t, double u1, double u2) {
        return ell2(spec_from_name(family), t, {u1, u2});
      },
      py::arg("family"), py::arg("t"), py::arg("u1"), py::arg("u2"));
  m.def(
      "conditional_quantile",
      [](const std::string& family, double u1, double w, double theta) {
        return conditional_quantile(spec_from_name(family), u1, w, theta);
      },
      py::arg("family"), py::arg("u1"), py::arg("w"), py::arg("theta"));
  m.def(
      "sample_pairs",
      [](const std::string& family, double theta, int n, std::uint64_t seed) {
        const CopulaSpec spec = spec_from_name(family);
        RngStream rng(seed);
        std::vector<double> u1(n), u2(n);
        for (int i = 0; i < n; ++i) {
          const UniformPair p = sample_pair(spec, theta, rng);
          u1[i] = p.u1;
          u2[i] = p.u2;
        }
        return std::make_pair(u1, u2);
      },
      py::arg("family"), py::arg("theta"), py::arg("n"), py::arg("seed"));

  m.def(
      "kernel_eval",
      [](const std::string& kernel, double t) { return kernel_eval(kernel_from_name(kernel), t); },
      py::arg("kernel"), py::arg("t"));
  m.def(
      "kernel_self_convolution",
      [](const std::string& kernel, double t) {
        return kernel_self_convolution(kernel_from_name(kernel), t);
      },
      py::arg("kernel"), py::arg("t"));
  m.def(
      "kernel_constants",
      [](const std::string& kernel, int order) {
        return constants_for(kernel_from_name(kernel), order);
      },
      py::arg("kernel"), py::arg("order"));
  m.def(
      "null_dof",
      [](const std::string& kernel, int order, double covariate_range, double h) {
        return null_dof(constants_for(kernel_from_name(kernel), order), covariate_range, h);
      },
      py::arg("kernel"), py::arg("order"), py::arg("covariate_range"), py::arg("h"));

  m.def("pseudo_observations", &pseudo_observations, py::arg("y1"), py::arg("y2"));
  m.def(
      "fit_parametric",
      [](const Dataset& data, const std::string& family, int degree) {
        return fit_parametric(data, spec_from_name(family), degree);
      },
      py::arg("data"), py::arg("family"), py::arg("degree"));
  m.def(
      "local_polynomial_fit",
      [](const Dataset& data, const std::string& family, const std::string& kernel,
         double x0, double h, int degree) {
        return local_polynomial_fit(data, spec_from_name(family), kernel_from_name(kernel),
                                    x0, h, degree);
      },
      py::arg("data"), py::arg("family"), py::arg("kernel"), py::arg("x0"), py::arg("h"),
      py::arg("degree"));
  m.def(
      "estimate_curve",
      [](const Dataset& data, const std::string& family, const std::string& kernel,
         const std::vector<double>& grid, double h, int degree) {
        return estimate_curve(data, spec_from_name(family), kernel_from_name(kernel), grid,
                              h, degree);
      },
      py::arg("data"), py::arg("family"), py::arg("kernel"), py::arg("grid"), py::arg("h"),
      py::arg("degree"));
  m.def(
      "loo_cv_bandwidth",
      [](const Dataset& data, const std::string& family, const std::string& kernel,
         const std::vector<double>& grid, int degree, int threads) {
        return loo_cv_bandwidth(data, spec_from_name(family), kernel_from_name(kernel),
                                grid, degree, threads);
      },
      py::arg("data"), py::arg("family"), py::arg("kernel"), py::arg("grid"),
      py::arg("degree"), py::arg("threads") = 1);
  m.def("default_bandwidth_grid", &default_bandwidth_grid, py::arg("range"));

  m.def("chisq_upper_tail", &chisq_upper_tail, py::arg("x"), py::arg("dof"));
  m.def("glrt_p_value", &glrt_p_value, py::arg("lambda_"), py::arg("dof"), py::arg("r_k"));
  m.def(
      "run_test",
      [](const Dataset& data, const std::string& family, int null_degree,
         const std::string& kernel, std::optional<double> h, std::vector<double> grid,
         int threads) {
        GlrtOptions options;
        options.h = h;
        options.bandwidth_grid = std::move(grid);
        options.threads = threads;
        return run_test(data, spec_from_name(family), null_degree,
                        kernel_from_name(kernel), options);
      },
      py::arg("data"), py::arg("family"), py::arg("null_degree"),
      py::arg("kernel") = "epanechnikov", py::arg("h") = std::nullopt,
      py::arg("grid") = std::vector<double>{}, py::arg("threads") = 1);

  m.def(
      "generate_dataset",
      [](const std::string& model, int n, std::uint64_t seed) {
        return generate_dataset(model_from_name(model), n, seed);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def(
      "run_scenario",
      [](const std::string& model, int n, int replicates, std::vector<int> null_degrees,
         std::vector<double> alpha_levels, std::uint64_t seed, const std::string& kernel,
         std::vector<double> grid, int threads) {
        ScenarioSpec spec;
        spec.model = model_from_name(model);
        spec.n = n;
        spec.replicates = replicates;
        spec.null_degrees = std::move(null_degrees);
        spec.alpha_levels = std::move(alpha_levels);
        spec.seed = seed;
        spec.kernel = kernel_from_name(kernel);
        spec.bandwidth_grid = std::move(grid);
        spec.threads = threads;
        return run_scenario(spec);
      },
      py::arg("model"), py::arg("n"), py::arg("replicates"),
      py::arg("null_degrees") = std::vector<int>{0},
      py::arg("alpha_levels") = std::vector<double>{0.10, 0.05, 0.01}, py::arg("seed") = 0,
      py::arg("kernel") = "epanechnikov", py::arg("grid") = std::vector<double>{},
      py::arg("threads") = 1);
  m.def(
      "wilks_check",
      [](int n, int replicates, const std::string& kernel, std::optional<double> fixed_h,
         std::uint64_t seed, int threads) {
        return wilks_check(n, replicates, kernel_from_name(kernel), fixed_h, seed, threads);
      },
      py::arg("n"), py::arg("replicates"), py::arg("kernel") = "epanechnikov",
      py::arg("fixed_h") = std::nullopt, py::arg("seed") = 0, py::arg("threads") = 1);
  m.def("paper_bandwidth_grid", &paper_bandwidth_grid);
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
}
