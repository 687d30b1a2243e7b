#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trr/channel.hpp"
#include "trr/config.hpp"
#include "trr/dataset_io.hpp"
#include "trr/metrics.hpp"
#include "trr/network.hpp"
#include "trr/sensing.hpp"
#include "trr/solvers.hpp"
#include "trr/workbench.hpp"

namespace py = pybind11;

namespace {

trr::SolverOptions make_options(double eps, int max_iter, bool zero_init,
                                std::optional<trr::Vec> label) {
  trr::SolverOptions opt;
  opt.eps = eps;
  opt.max_iter = max_iter;
  opt.zero_init = zero_init;
  opt.label = std::move(label);
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trimmed-ridge regression workbench: sparse beamspace channel "
            "reconstruction, the unfolded network, and evaluation metrics.";

  // --- channel model ---
  py::class_<trr::PathSet>(m, "PathSet")
      .def_readonly("gains", &trr::PathSet::gains)
      .def_readonly("directions", &trr::PathSet::directions)
      .def_readonly("angles", &trr::PathSet::angles)
      .def_property_readonly("n_paths", &trr::PathSet::n_paths);

  m.def("steering_vector", &trr::steering_vector, py::arg("direction"),
        py::arg("n_antennas"));
  m.def(
      "sample_paths",
      [](int n_paths, std::uint64_t seed) {
        trr::Rng rng(seed);
        return trr::sample_paths(n_paths, rng);
      },
      py::arg("n_paths"), py::arg("seed"));
  m.def("synthesize_channel", &trr::synthesize_channel, py::arg("paths"),
        py::arg("n_antennas"));
  m.def("dft_matrix", &trr::dft_matrix, py::arg("n_antennas"));
  m.def("to_beamspace", &trr::to_beamspace, py::arg("h"), py::arg("u"));
  m.def("normalize_channel", &trr::normalize_channel, py::arg("h_b"));
  m.def("sparsify_top", &trr::sparsify_top, py::arg("h_b"), py::arg("n_keep"));

  // --- sensing ---
  py::class_<trr::MeasurementMatrix>(m, "MeasurementMatrix")
      .def(py::init([](trr::Mat entries) {
             return trr::MeasurementMatrix{std::move(entries)};
           }),
           py::arg("entries"))
      .def_readonly("entries", &trr::MeasurementMatrix::entries)
      .def_property_readonly("m_rows", &trr::MeasurementMatrix::m_rows)
      .def_property_readonly("n_cols", &trr::MeasurementMatrix::n_cols);

  py::class_<trr::ComplexObservation>(m, "ComplexObservation")
      .def_readonly("measurements", &trr::ComplexObservation::measurements)
      .def_readonly("snr_db", &trr::ComplexObservation::snr_db)
      .def_readonly("noise_var", &trr::ComplexObservation::noise_var);

  m.def(
      "bernoulli_matrix",
      [](int m_rows, int n_cols, std::uint64_t seed) {
        trr::Rng rng(seed);
        return trr::bernoulli_matrix(m_rows, n_cols, rng);
      },
      py::arg("m_rows"), py::arg("n_cols"), py::arg("seed"));
  m.def(
      "observe",
      [](const trr::MeasurementMatrix& phi, const trr::CVec& h_b,
         std::optional<double> snr_db, std::uint64_t seed) {
        trr::Rng rng(seed);
        return trr::observe(phi, h_b, snr_db, rng);
      },
      py::arg("phi"), py::arg("h_b"), py::arg("snr_db"), py::arg("seed"));
  m.def("merge_complex", &trr::merge_complex, py::arg("x_re"), py::arg("x_im"));

  // --- solvers ---
  py::class_<trr::SolverReport>(m, "SolverReport")
      .def_readonly("solution", &trr::SolverReport::solution)
      .def_readonly("iterations_run", &trr::SolverReport::iterations_run)
      .def_readonly("objective_trace", &trr::SolverReport::objective_trace)
      .def_readonly("error_trace", &trr::SolverReport::error_trace)
      .def_readonly("norm_trace", &trr::SolverReport::norm_trace)
      .def_readonly("converged", &trr::SolverReport::converged);

  m.def("top_k2_norm", &trr::top_k2_norm, py::arg("x"), py::arg("k"));
  m.def("trim_top_k", &trr::trim_top_k, py::arg("z"), py::arg("k"));
  m.def("lipschitz_constant", &trr::lipschitz_constant, py::arg("a_matrix"));
  m.def(
      "itrr",
      [](const trr::MeasurementMatrix& phi, const trr::Vec& y, double rho,
         int top_k, double eps, int max_iter, bool zero_init,
         std::optional<trr::Vec> label) {
        return trr::itrr(trr::make_trr_problem(phi, y, rho, top_k),
                         make_options(eps, max_iter, zero_init, std::move(label)));
      },
      py::arg("phi"), py::arg("y"), py::arg("rho") = 1.0, py::arg("top_k") = 16,
      py::arg("eps") = 1e-10, py::arg("max_iter") = 3000,
      py::arg("zero_init") = false, py::arg("label") = std::nullopt);
  m.def(
      "itrr_bb",
      [](const trr::MeasurementMatrix& phi, const trr::Vec& y, double rho,
         int top_k, double eps, int max_iter, bool zero_init,
         std::optional<trr::Vec> label) {
        return trr::itrr_bb(trr::make_trr_problem(phi, y, rho, top_k),
                            make_options(eps, max_iter, zero_init, std::move(label)));
      },
      py::arg("phi"), py::arg("y"), py::arg("rho") = 1.0, py::arg("top_k") = 16,
      py::arg("eps") = 1e-10, py::arg("max_iter") = 3000,
      py::arg("zero_init") = false, py::arg("label") = std::nullopt);
  m.def(
      "pgd_ridge",
      [](const trr::MeasurementMatrix& phi, const trr::Vec& y, double lambda2,
         const std::string& step_rule, double eps, int max_iter) {
        const trr::StepRule rule =
            step_rule == "fixed" ? trr::StepRule::fixed : trr::StepRule::bb;
        return trr::pgd_ridge(phi, y, lambda2, rule,
                              make_options(eps, max_iter, false, std::nullopt));
      },
      py::arg("phi"), py::arg("y"), py::arg("lambda2") = 1.0,
      py::arg("step_rule") = "bb", py::arg("eps") = 1e-10,
      py::arg("max_iter") = 3000);
  m.def(
      "pgd_lasso",
      [](const trr::MeasurementMatrix& phi, const trr::Vec& y, double lambda1,
         double eps, int max_iter) {
        return trr::pgd_lasso(phi, y, lambda1,
                              make_options(eps, max_iter, false, std::nullopt));
      },
      py::arg("phi"), py::arg("y"), py::arg("lambda1") = 1e-4,
      py::arg("eps") = 1e-10, py::arg("max_iter") = 3000);
  m.def("omp", &trr::omp, py::arg("phi"), py::arg("y"), py::arg("sparsity"));

  // --- unfolded network ---
  py::class_<trr::UtrrParams>(m, "UtrrParams")
      .def_readonly("top_k_last", &trr::UtrrParams::top_k_last)
      .def_readwrite("top_k_all_layers", &trr::UtrrParams::top_k_all_layers)
      .def_property_readonly("n_layers", &trr::UtrrParams::n_layers)
      .def_property_readonly("parameter_count", &trr::UtrrParams::parameter_count);

  py::class_<trr::TrainHistory>(m, "TrainHistory")
      .def_readonly("best_epoch", &trr::TrainHistory::best_epoch)
      .def_readonly("best_val_loss", &trr::TrainHistory::best_val_loss)
      .def_readonly("stopped_early", &trr::TrainHistory::stopped_early)
      .def_property_readonly("n_epochs", [](const trr::TrainHistory& h) {
        return h.epochs.size();
      });

  m.def("init_params", &trr::init_params, py::arg("phi"), py::arg("n_layers"),
        py::arg("top_k"));
  m.def(
      "forward",
      [](const trr::UtrrParams& params, const trr::Vec& y) {
        return trr::forward(params, y);
      },
      py::arg("params"), py::arg("y"));
  m.def("ensemble_predict", &trr::ensemble_predict, py::arg("models"), py::arg("y"));
  m.def("save_model", &trr::save_model, py::arg("params"), py::arg("path"));
  m.def(
      "load_model",
      [](const std::string& path, const trr::MeasurementMatrix& phi) {
        trr::UtrrParams p = trr::load_model(path);
        p.phi = phi.entries;
        return p;
      },
      py::arg("path"), py::arg("phi"));

  // --- datasets & training from a config ---
  py::class_<trr::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("n_antennas", &trr::ExperimentConfig::n_antennas)
      .def_readwrite("n_measurements", &trr::ExperimentConfig::n_measurements)
      .def_readwrite("n_users", &trr::ExperimentConfig::n_users)
      .def_readwrite("n_paths", &trr::ExperimentConfig::n_paths)
      .def_readwrite("snr_db", &trr::ExperimentConfig::snr_db)
      .def_readwrite("sparsity", &trr::ExperimentConfig::sparsity)
      .def_readwrite("train_channels", &trr::ExperimentConfig::train_channels)
      .def_readwrite("val_channels", &trr::ExperimentConfig::val_channels)
      .def_readwrite("test_channels", &trr::ExperimentConfig::test_channels)
      .def_readwrite("solver", &trr::ExperimentConfig::solver)
      .def_readwrite("rho", &trr::ExperimentConfig::rho)
      .def_readwrite("top_k", &trr::ExperimentConfig::top_k)
      .def_readwrite("eps", &trr::ExperimentConfig::eps)
      .def_readwrite("max_iter", &trr::ExperimentConfig::max_iter)
      .def_readwrite("layers", &trr::ExperimentConfig::layers)
      .def_readwrite("seed", &trr::ExperimentConfig::seed);

  py::class_<trr::RealPair>(m, "RealPair")
      .def_readonly("measurement", &trr::RealPair::measurement)
      .def_readonly("label", &trr::RealPair::label);

  py::class_<trr::Dataset>(m, "Dataset")
      .def_readonly("pairs", &trr::Dataset::pairs)
      .def_readonly("phi", &trr::Dataset::phi)
      .def_property_readonly("n_pairs", [](const trr::Dataset& d) {
        return d.pairs.size();
      });

  py::class_<trr::DatasetBundle>(m, "DatasetBundle")
      .def_readonly("train", &trr::DatasetBundle::train)
      .def_readonly("val", &trr::DatasetBundle::val)
      .def_readonly("test", &trr::DatasetBundle::test);

  m.def("parse_config", &trr::parse_config, py::arg("text"));
  m.def("print_config", &trr::print_config, py::arg("config"));
  m.def("build_dataset", &trr::build_dataset, py::arg("config"), py::arg("seed"));
  m.def("write_dataset", &trr::write_dataset, py::arg("bundle"), py::arg("path"));
  m.def("read_dataset", &trr::read_dataset, py::arg("path"),
        py::arg("snr_db") = std::nullopt);
  m.def(
      "train",
      [](trr::UtrrParams params, const trr::Dataset& train_set,
         const trr::Dataset& val_set, std::vector<double> learning_rates,
         int max_epochs, int patience, int batch_size, std::uint64_t seed) {
        trr::TrainConfig cfg;
        if (!learning_rates.empty()) cfg.learning_rates = std::move(learning_rates);
        cfg.max_epochs = max_epochs;
        cfg.patience = patience;
        cfg.batch_size = batch_size;
        cfg.seed = seed;
        return trr::train(std::move(params), train_set, val_set, cfg);
      },
      py::arg("params"), py::arg("train_set"), py::arg("val_set"),
      py::arg("learning_rates") = std::vector<double>{}, py::arg("max_epochs") = 50,
      py::arg("patience") = 10, py::arg("batch_size") = 128, py::arg("seed") = 0);

  // --- metrics ---
  m.def("normalized_sq_error",
        py::overload_cast<const trr::CVec&, const trr::CVec&>(&trr::normalized_sq_error),
        py::arg("x"), py::arg("x_hat"));
  m.def("nmse_db", &trr::nmse_db, py::arg("truth"), py::arg("estimate"));
  m.def("accurate_ratio", &trr::accurate_ratio, py::arg("errors"), py::arg("threshold"));
  m.def(
      "zf_precoder",
      [](const trr::MultiUserChannel& h_est) { return trr::zf_precoder(h_est).columns; },
      py::arg("h_est"));
  m.def(
      "sum_rate",
      [](const trr::MultiUserChannel& h_true, const trr::CMat& precoder,
         double snr_dl_db) {
        trr::Precoder f;
        f.columns = precoder;
        f.unnormalized_frobenius = 1.0;
        return trr::sum_rate(h_true, f, snr_dl_db);
      },
      py::arg("h_true"), py::arg("precoder"), py::arg("snr_dl_db"));
}
