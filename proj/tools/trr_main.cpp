#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "trr/workbench.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* cfg = cmd->add_option("--config", flags.config, "experiment config file");
  if (config_required) cfg->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "output directory")->required();
  cmd->add_option("--seed", flags.seed, "master seed (overrides TRR_SEED and config)")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--threads", flags.threads, "worker threads for sample-parallel stages")
      ->check(CLI::PositiveNumber);
}

trr::RunOptions to_options(const CommonFlags& flags) {
  trr::RunOptions opt;
  opt.config_path = flags.config;
  opt.out_dir = flags.out;
  if (flags.seed_set) opt.seed_flag = flags.seed;
  opt.threads = flags.threads;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trimmed-ridge regression workbench for beamspace channel estimation"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto* gen = app.add_subcommand("gen-data", "generate a supervised dataset");
  add_common(gen, gen_flags, true);

  CommonFlags solve_flags;
  std::string solve_data, solver_name;
  auto* solve = app.add_subcommand("solve", "run an iterative solver on the test split");
  add_common(solve, solve_flags, false);
  solve->add_option("--data", solve_data, "dataset directory")->required();
  solve->add_option("--solver", solver_name,
                    "one of itrr, itrr-bb, pgd-ridge, pgd-lasso, omp")
      ->required();

  CommonFlags train_flags;
  std::string train_data;
  bool no_rcc = false;
  auto* train = app.add_subcommand("train", "train one UTRR model per configured top-K");
  add_common(train, train_flags, false);
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_flag("--no-rcc", no_rcc, "apply the top-K term in every layer");

  CommonFlags eval_flags;
  std::string eval_data, eval_models, eval_mode = "single";
  std::vector<double> eval_thresholds;
  auto* eval = app.add_subcommand("evaluate", "evaluate trained models on the test split");
  add_common(eval, eval_flags, false);
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--models", eval_models, "directory of .utrr model files")->required();
  eval->add_option("--mode", eval_mode, "single or ensemble");
  eval->add_option("--thresholds", eval_thresholds,
                   "accurate-reconstruction thresholds")
      ->delimiter(',');

  CommonFlags sweep_flags;
  std::vector<std::string> snr_list;
  auto* sweep = app.add_subcommand("sweep-snr", "NMSE of configured estimators vs SNR");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("--snr", snr_list, "SNR points in dB ('noiseless' allowed)")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    trr::RunArtifact art;
    if (gen->parsed()) {
      art = trr::run_gen_data(to_options(gen_flags));
    } else if (solve->parsed()) {
      trr::RunOptions opt = to_options(solve_flags);
      opt.data_dir = solve_data;
      opt.solver = solver_name;
      art = trr::run_solve(opt);
    } else if (train->parsed()) {
      trr::RunOptions opt = to_options(train_flags);
      opt.data_dir = train_data;
      opt.no_rcc = no_rcc;
      art = trr::run_train(opt);
    } else if (eval->parsed()) {
      trr::RunOptions opt = to_options(eval_flags);
      opt.data_dir = eval_data;
      opt.models_dir = eval_models;
      opt.mode = eval_mode;
      opt.thresholds = eval_thresholds;
      art = trr::run_evaluate(opt);
    } else if (sweep->parsed()) {
      trr::RunOptions opt = to_options(sweep_flags);
      opt.snr_list = snr_list;
      art = trr::run_sweep_snr(opt);
    }
    std::cout << art.summary << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
