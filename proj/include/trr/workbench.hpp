#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trr/config.hpp"

namespace trr {

// One CLI invocation's outputs: a directory holding the config snapshot,
// data/model/CSV files and a log. The snapshot alone re-runs the artifact.
struct RunArtifact {
  std::string out_dir;
  std::vector<std::string> files;
  std::string summary;
};

struct RunOptions {
  std::string config_path;
  std::string data_dir;
  std::string models_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed_flag;
  int threads = 1;

  std::string solver;                  // solve
  bool no_rcc = false;                 // train
  std::string mode = "single";         // evaluate
  std::vector<double> thresholds;      // evaluate override
  std::vector<std::string> snr_list;   // sweep-snr ("noiseless" allowed)
};

/// CLI flag > TRR_SEED env var > config file > 42.
std::uint64_t resolve_seed(const ExperimentConfig& cfg,
                           std::optional<std::uint64_t> cli_flag);

RunArtifact run_gen_data(const RunOptions& opt);
RunArtifact run_solve(const RunOptions& opt);
RunArtifact run_train(const RunOptions& opt);
RunArtifact run_evaluate(const RunOptions& opt);
RunArtifact run_sweep_snr(const RunOptions& opt);

}  // namespace trr
